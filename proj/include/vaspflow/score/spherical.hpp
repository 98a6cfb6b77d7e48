#pragma once

#include <Eigen/Dense>

namespace vaspflow::score {

/// Real spherical harmonic Y_lm evaluated at a direction (need not be unit
/// length; the zero vector is rejected). Orthonormal over the unit sphere:
/// integral of Y_lm * Y_l'm' equals the Kronecker delta. m runs -l..l, with
/// positive m carrying cos(m phi) and negative m sin(|m| phi). Supports
/// l up to 16.
double real_spherical_harmonic(int l, int m, const Eigen::Vector3d& direction);

/// Exponentially scaled modified spherical Bessel function of the first
/// kind, exp(-x) * i_l(x), for x >= 0. The scaling keeps the value in
/// [0, 1] for all arguments, so Gaussian-overlap integrands can be built
/// without overflow. Power series below x = 30, upward recurrence above
/// (stable there since x greatly exceeds the supported l).
double scaled_bessel_i(int l, double x);

/// Gauss-Legendre rule with n nodes mapped to [a, b]. Nodes ascend.
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
Quadrature gauss_legendre(int n, double a, double b);

}  // namespace vaspflow::score
