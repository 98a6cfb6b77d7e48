#include "vaspflow/score/spherical.hpp"

#include <cmath>

#include "vaspflow/errors.hpp"

namespace vaspflow::score {

namespace {

constexpr int kMaxL = 16;

/// Associated Legendre P_l^m(x) for 0 <= m <= l, without the
/// Condon-Shortley phase.
double assoc_legendre(int l, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

}  // namespace

double real_spherical_harmonic(int l, int m, const Eigen::Vector3d& direction) {
  if (l < 0 || l > kMaxL || std::abs(m) > l)
    throw Error(ErrorKind::BadScoreInput,
                "spherical harmonic order out of range: l=" + std::to_string(l) +
                    " m=" + std::to_string(m));
  const double r = direction.norm();
  if (!(r > 0.0) || !direction.allFinite())
    throw Error(ErrorKind::BadScoreInput,
                "spherical harmonic direction must be finite and nonzero");

  const double cos_theta = direction.z() / r;
  const int am = std::abs(m);

  double norm = (2.0 * l + 1.0) / (4.0 * M_PI);
  for (int k = l - am + 1; k <= l + am; ++k) norm /= k;
  norm = std::sqrt(norm);

  const double p = assoc_legendre(l, am, cos_theta);
  if (m == 0) return norm * p;

  const double phi = std::atan2(direction.y(), direction.x());
  const double angular = m > 0 ? std::cos(am * phi) : std::sin(am * phi);
  return std::sqrt(2.0) * norm * p * angular;
}

double scaled_bessel_i(int l, double x) {
  if (l < 0 || l > kMaxL || x < 0.0 || !std::isfinite(x))
    throw Error(ErrorKind::BadScoreInput,
                "scaled bessel arguments out of range");
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;

  if (x < 30.0) {
    // i_l(x) = sum_k x^(l+2k) / (2^k k! (2l+2k+1)!!), all terms positive
    double dfact = 1.0;
    for (int k = 1; k <= 2 * l + 1; k += 2) dfact *= k;
    double term = std::pow(x, l) / dfact;
    double sum = term;
    for (int k = 1; k <= 400; ++k) {
      term *= x * x / (2.0 * k * (2.0 * l + 2.0 * k + 1.0));
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return std::exp(-x) * sum;
  }

  const double em2x = std::exp(-2.0 * x);
  double prev = (1.0 - em2x) / (2.0 * x);  // exp(-x) i_0
  if (l == 0) return prev;
  double curr = (x * (1.0 + em2x) / 2.0 - (1.0 - em2x) / 2.0) / (x * x);
  for (int ll = 1; ll < l; ++ll) {
    const double next = prev - (2.0 * ll + 1.0) / x * curr;
    prev = curr;
    curr = next;
  }
  return curr;
}

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 1 || !(b > a))
    throw Error(ErrorKind::BadScoreInput, "bad quadrature request");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = x;
    q.weights[i] = w;
    q.nodes[n - 1 - i] = -x;
    q.weights[n - 1 - i] = w;
  }

  const double mid = 0.5 * (a + b);
  const double scale = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = mid - scale * q.nodes[i];  // flip so nodes ascend
    q.weights[i] *= scale;
  }
  return q;
}

}  // namespace vaspflow::score
