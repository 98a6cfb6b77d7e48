#include "vaspflow/score/soap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vaspflow/errors.hpp"
#include "vaspflow/score/spherical.hpp"

namespace vaspflow::score {

namespace {

constexpr int kRadialNodes = 256;

double cutoff_weight(double r, double rc) {
  if (r >= rc) return 0.0;
  return 0.5 * (std::cos(M_PI * r / rc) + 1.0);
}

Eigen::MatrixXd raw_gaussians(const SoapParams& p, const Eigen::VectorXd& r) {
  const int n = p.n_max;
  const double spacing = n > 1 ? p.cutoff / (n - 1) : p.cutoff;
  Eigen::MatrixXd raw(n, r.size());
  for (int k = 0; k < n; ++k) {
    const double center = n > 1 ? k * spacing : 0.0;
    for (Eigen::Index q = 0; q < r.size(); ++q) {
      const double dr = r[q] - center;
      raw(k, q) = std::exp(-dr * dr / (2.0 * spacing * spacing));
    }
  }
  return raw;
}

/// Symmetric orthonormalization of the raw Gaussians against the r^2
/// measure on [0, cutoff + 6 sigma], so the expansion coefficients are an
/// orthogonal projection of the neighbor density.
Eigen::MatrixXd orthonormalizer(const SoapParams& p, const Quadrature& quad) {
  const Eigen::MatrixXd raw = raw_gaussians(p, quad.nodes);
  const int n = p.n_max;
  Eigen::MatrixXd overlap(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b <= n - 1; ++b) {
      double sum = 0.0;
      for (Eigen::Index q = 0; q < quad.nodes.size(); ++q)
        sum += quad.weights[q] * quad.nodes[q] * quad.nodes[q] * raw(a, q) *
               raw(b, q);
      overlap(a, b) = sum;
      overlap(b, a) = sum;
    }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(overlap);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorKind::BadScoreInput,
                "radial basis overlap is not positive definite");
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

struct RadialBasis {
  Quadrature quad;
  Eigen::MatrixXd projector;  // n_max x nodes: weight * r^2 * g_n(r)

  explicit RadialBasis(const SoapParams& p) {
    quad = gauss_legendre(kRadialNodes, 0.0, p.cutoff + 6.0 * p.sigma);
    projector = orthonormalizer(p, quad) * raw_gaussians(p, quad.nodes);
    for (Eigen::Index q = 0; q < quad.nodes.size(); ++q)
      projector.col(q) *= quad.weights[q] * quad.nodes[q] * quad.nodes[q];
  }
};

/// Offset and length of each species-pair block in the flat layout.
std::map<std::pair<std::string, std::string>, std::pair<int, int>> block_spans(
    const std::vector<std::string>& species, int n_max, int l_max) {
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> spans;
  int offset = 0;
  for (std::size_t a = 0; a < species.size(); ++a)
    for (std::size_t b = a; b < species.size(); ++b) {
      const int radial_pairs = a == b ? n_max * (n_max + 1) / 2 : n_max * n_max;
      const int length = radial_pairs * (l_max + 1);
      spans[{species[a], species[b]}] = {offset, length};
      offset += length;
    }
  return spans;
}

int layout_size(int n_species, int n_max, int l_max) {
  const int diag = n_species * (n_max * (n_max + 1) / 2);
  const int cross = n_species * (n_species - 1) / 2 * n_max * n_max;
  return (diag + cross) * (l_max + 1);
}

}  // namespace

void validate(const SoapParams& p) {
  if (!(p.cutoff > 0.0) || !(p.sigma > 0.0) || p.n_max < 1 || p.l_max < 0 ||
      p.l_max > 16)
    throw Error(ErrorKind::BadScoreInput,
                "SOAP parameters must be positive with n_max >= 1 and "
                "0 <= l_max <= 16");
}

std::vector<SoapVector> soap_site_descriptors(const vasp::CrystalStructure& s,
                                              const SoapParams& p) {
  validate(p);
  vasp::validate(s);
  const int n_atoms = vasp::atom_count(s);
  if (n_atoms == 0)
    throw Error(ErrorKind::EmptyStructure, "SOAP needs at least one atom");

  std::vector<std::string> species_list(s.species.begin(), s.species.end());
  std::sort(species_list.begin(), species_list.end());
  species_list.erase(std::unique(species_list.begin(), species_list.end()),
                     species_list.end());
  std::map<std::string, int> channel;
  for (std::size_t i = 0; i < species_list.size(); ++i)
    channel[species_list[i]] = static_cast<int>(i);
  const int n_species = static_cast<int>(species_list.size());

  const RadialBasis basis(p);
  const double alpha = 1.0 / (2.0 * p.sigma * p.sigma);
  const int n_lm = (p.l_max + 1) * (p.l_max + 1);

  const Eigen::Matrix3d lat = vasp::effective_lattice(s);
  const Eigen::Matrix3Xd frac =
      vasp::wrap_fractional(vasp::fractional_positions(s));
  const Eigen::Matrix3Xd cart = lat.transpose() * frac;
  const auto symbols = vasp::atom_species(s);

  const Eigen::Vector3d heights = vasp::cell_heights(s);
  Eigen::Vector3i range;
  for (int d = 0; d < 3; ++d)
    range[d] = static_cast<int>(std::ceil(p.cutoff / heights[d])) + 1;

  // radial integrals for one neighbor distance: I(n, l)
  auto radial_integrals = [&](double dist) {
    Eigen::MatrixXd bessel(p.l_max + 1, kRadialNodes);
    for (int q = 0; q < kRadialNodes; ++q) {
      const double r = basis.quad.nodes[q];
      const double gauss = std::exp(-alpha * (r - dist) * (r - dist));
      const double x = 2.0 * alpha * r * dist;
      for (int l = 0; l <= p.l_max; ++l)
        bessel(l, q) = gauss * scaled_bessel_i(l, x);
    }
    return Eigen::MatrixXd(basis.projector * bessel.transpose());
  };

  std::vector<SoapVector> out;
  out.reserve(static_cast<std::size_t>(n_atoms));

  for (int i = 0; i < n_atoms; ++i) {
    // expansion coefficients c[species](n, lm)
    std::vector<Eigen::MatrixXd> coeff(
        static_cast<std::size_t>(n_species),
        Eigen::MatrixXd::Zero(p.n_max, n_lm));

    for (int j = 0; j < n_atoms; ++j) {
      const int ch = channel[symbols[static_cast<std::size_t>(j)]];
      for (int na = -range[0]; na <= range[0]; ++na)
        for (int nb = -range[1]; nb <= range[1]; ++nb)
          for (int nc = -range[2]; nc <= range[2]; ++nc) {
            const Eigen::Vector3d shift =
                lat.transpose() * Eigen::Vector3d(na, nb, nc);
            const Eigen::Vector3d d = cart.col(j) + shift - cart.col(i);
            const double dist = d.norm();
            if (dist > p.cutoff) continue;
            const double w = cutoff_weight(dist, p.cutoff);

            if (dist < 1e-9) {
              // central Gaussian: only the l = 0 channel survives
              const Eigen::MatrixXd integrals = radial_integrals(0.0);
              const double y00 = 0.5 / std::sqrt(M_PI);
              for (int n = 0; n < p.n_max; ++n)
                coeff[static_cast<std::size_t>(ch)](n, 0) +=
                    4.0 * M_PI * y00 * integrals(n, 0);
              continue;
            }

            const Eigen::MatrixXd integrals = radial_integrals(dist);
            for (int l = 0; l <= p.l_max; ++l)
              for (int m = -l; m <= l; ++m) {
                const double y = real_spherical_harmonic(l, m, d);
                const int lm = l * l + l + m;
                for (int n = 0; n < p.n_max; ++n)
                  coeff[static_cast<std::size_t>(ch)](n, lm) +=
                      w * 4.0 * M_PI * y * integrals(n, l);
              }
          }
    }

    SoapVector vec;
    vec.species = species_list;
    vec.n_max = p.n_max;
    vec.l_max = p.l_max;
    vec.components.setZero(layout_size(n_species, p.n_max, p.l_max));
    int idx = 0;
    for (int a = 0; a < n_species; ++a)
      for (int b = a; b < n_species; ++b)
        for (int n1 = 0; n1 < p.n_max; ++n1)
          for (int n2 = (a == b ? n1 : 0); n2 < p.n_max; ++n2)
            for (int l = 0; l <= p.l_max; ++l) {
              double sum = 0.0;
              for (int m = -l; m <= l; ++m) {
                const int lm = l * l + l + m;
                sum += coeff[static_cast<std::size_t>(a)](n1, lm) *
                       coeff[static_cast<std::size_t>(b)](n2, lm);
              }
              const bool diagonal = a == b && n1 == n2;
              const double factor = diagonal ? 1.0 : std::sqrt(2.0);
              vec.components[idx++] =
                  factor * M_PI * std::sqrt(8.0 / (2.0 * l + 1.0)) * sum;
            }
    out.push_back(std::move(vec));
  }
  return out;
}

SoapVector soap_descriptor(const vasp::CrystalStructure& s,
                           const SoapParams& p) {
  const auto sites = soap_site_descriptors(s, p);
  SoapVector mean = sites.front();
  for (std::size_t i = 1; i < sites.size(); ++i)
    mean.components += sites[i].components;
  mean.components /= static_cast<double>(sites.size());
  return mean;
}

Eigen::MatrixXd radial_basis(const SoapParams& p, const Eigen::VectorXd& r) {
  validate(p);
  const Quadrature quad =
      gauss_legendre(kRadialNodes, 0.0, p.cutoff + 6.0 * p.sigma);
  return orthonormalizer(p, quad) * raw_gaussians(p, r);
}

double soap_similarity(const SoapVector& a, const SoapVector& b) {
  if (a.n_max != b.n_max || a.l_max != b.l_max)
    throw Error(ErrorKind::LayoutMismatch,
                "SOAP vectors were built with different n_max/l_max");
  const auto spans_a = block_spans(a.species, a.n_max, a.l_max);
  const auto spans_b = block_spans(b.species, b.n_max, b.l_max);
  if (a.components.size() != layout_size(static_cast<int>(a.species.size()),
                                         a.n_max, a.l_max) ||
      b.components.size() != layout_size(static_cast<int>(b.species.size()),
                                         b.n_max, b.l_max))
    throw Error(ErrorKind::LayoutMismatch,
                "SOAP vector length does not match its declared layout");

  const double norm_a = a.components.norm();
  const double norm_b = b.components.norm();
  if (norm_a == 0.0 || norm_b == 0.0)
    throw Error(ErrorKind::ZeroNormDescriptor,
                "cannot take cosine similarity with a zero descriptor");

  double dot = 0.0;
  for (const auto& [pair, span_a] : spans_a) {
    const auto it = spans_b.find(pair);
    if (it == spans_b.end()) continue;
    dot += a.components.segment(span_a.first, span_a.second)
               .dot(b.components.segment(it->second.first, it->second.second));
  }
  return std::clamp(dot / (norm_a * norm_b), 0.0, 1.0);
}

}  // namespace vaspflow::score
