#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>

#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::sim {

struct PairCoeffs {
  double epsilon = 0.0;  // eV
  double sigma = 0.0;    // angstrom
};

/// 12-6 pair potential standing in for DFT forces at desk scale. A global
/// (epsilon, sigma) pair applies to every species pair unless overridden.
/// The cutoff is global and the energy is shifted so V(cutoff) == 0; forces
/// below the cutoff are the untouched analytic LJ gradients, so the
/// two-body minimum sits exactly at 2^(1/6) sigma.
struct ToyPotentialParams {
  double pair_epsilon = 0.4;
  double pair_sigma = 2.2;
  double cutoff = 5.0;
  std::map<std::pair<std::string, std::string>, PairCoeffs> overrides;

  void set_pair(const std::string& a, const std::string& b, PairCoeffs c);
  PairCoeffs coeffs(const std::string& a, const std::string& b) const;
};

/// Throws BadPotentialParams when any coefficient is non-positive or the
/// cutoff is below a pair's sigma.
void validate_params(const ToyPotentialParams& p);

struct EnergyForces {
  double energy = 0.0;           // eV
  Eigen::Matrix3Xd forces;       // eV/angstrom, one column per atom
};

/// Periodic energy and analytic forces under the minimum image convention.
/// Requires cutoff < half the smallest cell height (CellTooSmall otherwise).
EnergyForces toy_energy_forces(const vasp::CrystalStructure& s,
                               const ToyPotentialParams& p);

}  // namespace vaspflow::sim
