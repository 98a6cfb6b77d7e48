#include "vaspflow/sim/potential.hpp"

#include <cmath>

#include "vaspflow/errors.hpp"

namespace vaspflow::sim {

namespace {

std::pair<std::string, std::string> pair_key(const std::string& a,
                                             const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

void ToyPotentialParams::set_pair(const std::string& a, const std::string& b,
                                  PairCoeffs c) {
  overrides[pair_key(a, b)] = c;
}

PairCoeffs ToyPotentialParams::coeffs(const std::string& a,
                                      const std::string& b) const {
  const auto it = overrides.find(pair_key(a, b));
  if (it != overrides.end()) return it->second;
  return {pair_epsilon, pair_sigma};
}

void validate_params(const ToyPotentialParams& p) {
  auto check = [&](const PairCoeffs& c, const std::string& label) {
    if (!(c.epsilon > 0.0) || !(c.sigma > 0.0))
      throw Error(ErrorKind::BadPotentialParams,
                  label + " coefficients must be positive");
    if (p.cutoff < c.sigma)
      throw Error(ErrorKind::BadPotentialParams,
                  "cutoff " + std::to_string(p.cutoff) + " is below sigma for " +
                      label);
  };
  if (!(p.cutoff > 0.0))
    throw Error(ErrorKind::BadPotentialParams, "cutoff must be positive");
  check({p.pair_epsilon, p.pair_sigma}, "default pair");
  for (const auto& [key, c] : p.overrides) check(c, key.first + "-" + key.second);
}

EnergyForces toy_energy_forces(const vasp::CrystalStructure& s,
                               const ToyPotentialParams& p) {
  vasp::validate(s);
  validate_params(p);
  const int n = vasp::atom_count(s);
  const Eigen::Matrix3d lat = vasp::effective_lattice(s);
  const Eigen::Vector3d heights = vasp::cell_heights(s);
  if (p.cutoff >= 0.5 * heights.minCoeff())
    throw Error(ErrorKind::CellTooSmall,
                "cutoff " + std::to_string(p.cutoff) +
                    " needs a cell height above " +
                    std::to_string(2.0 * p.cutoff));

  const Eigen::Matrix3Xd frac = vasp::fractional_positions(s);
  const auto symbols = vasp::atom_species(s);

  EnergyForces out;
  out.energy = 0.0;
  out.forces = Eigen::Matrix3Xd::Zero(3, n);
  const double rc2 = p.cutoff * p.cutoff;

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::Vector3d df = frac.col(j) - frac.col(i);
      df -= df.array().round().matrix();
      const Eigen::Vector3d rij = lat.transpose() * df;
      const double r2 = rij.squaredNorm();
      if (r2 >= rc2) continue;
      const auto c = p.coeffs(symbols[static_cast<std::size_t>(i)],
                              symbols[static_cast<std::size_t>(j)]);
      const double s2 = c.sigma * c.sigma / r2;
      const double s6 = s2 * s2 * s2;
      const double s12 = s6 * s6;
      const double sc6 = std::pow(c.sigma / p.cutoff, 6);
      out.energy += 4.0 * c.epsilon * (s12 - s6 - (sc6 * sc6 - sc6));
      // dV/dr / r, with V the unshifted pair term
      const double dv_over_r = 4.0 * c.epsilon * (-12.0 * s12 + 6.0 * s6) / r2;
      const Eigen::Vector3d fj = -dv_over_r * rij;
      out.forces.col(j) += fj;
      out.forces.col(i) -= fj;
    }
  }
  return out;
}

}  // namespace vaspflow::sim
