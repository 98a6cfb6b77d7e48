#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::score {

struct SoapParams {
  double cutoff = 5.0;  // angstrom
  int n_max = 8;
  int l_max = 6;
  double sigma = 0.5;  // neighbor Gaussian width, angstrom
};

void validate(const SoapParams& p);

/// Rotationally invariant per-species-pair power spectrum. The layout is
/// fixed by (species, n_max, l_max): species sorted lexicographically, one
/// block per unordered species pair (a <= b), within a block radial pairs
/// n1 <= n2 for a == b and all n1, n2 for a < b, each times l = 0..l_max.
/// Off-diagonal channel pairs carry a sqrt(2) factor so that the plain dot
/// product of two vectors equals the full ordered-pair sum and therefore
/// the Haar-integrated overlap kernel of the two expanded densities.
struct SoapVector {
  std::vector<std::string> species;  // sorted, unique
  int n_max = 0;
  int l_max = 0;
  Eigen::VectorXd components;
};

/// Per-site descriptors, one per atom, in POSCAR atom order. Each site's
/// neighbor density is the smooth-cutoff-weighted sum of Gaussians over all
/// periodic neighbor images within the cutoff, plus the site's own central
/// Gaussian (so an isolated atom has a fixed nonzero descriptor).
std::vector<SoapVector> soap_site_descriptors(const vasp::CrystalStructure& s,
                                              const SoapParams& p);

/// The averaged SOAP vector: the mean of the per-site descriptors.
SoapVector soap_descriptor(const vasp::CrystalStructure& s,
                           const SoapParams& p);

/// Cosine similarity clamped to [0, 1]. Layouts are merged over the union
/// of species pairs (absent pairs contribute zeros), so structures with
/// different compositions compare on a common footing. n_max/l_max must
/// agree (LayoutMismatch) and both vectors must be nonzero (ZeroNormDescriptor).
double soap_similarity(const SoapVector& a, const SoapVector& b);

/// The orthonormal radial basis g_n evaluated at the given radii, one row
/// per basis function. The functions are symmetric-orthonormalized Gaussians
/// and satisfy int g_n(r) g_m(r) r^2 dr = delta_nm over [0, cutoff + 6 sigma].
Eigen::MatrixXd radial_basis(const SoapParams& p, const Eigen::VectorXd& r);

}  // namespace vaspflow::score
