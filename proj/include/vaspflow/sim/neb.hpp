#pragma once

#include <vector>

#include "vaspflow/sim/potential.hpp"
#include "vaspflow/sim/relax.hpp"
#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::sim {

/// Linear interpolation in fractional coordinates along the minimum-image
/// displacement. Returns the n_images interior structures only. Endpoint
/// cells must agree to 1e-8 angstrom per component (CellMismatch), species
/// blocks exactly (SpeciesMismatch).
std::vector<vasp::CrystalStructure> neb_interpolate(
    const vasp::CrystalStructure& initial, const vasp::CrystalStructure& final,
    int n_images);

struct NebResult {
  std::vector<vasp::CrystalStructure> band;  // initial + images + final
  std::vector<double> energies;              // one per band member, eV
  bool converged = false;
  double barrier_ev = 0.0;  // max band energy - initial energy
  double delta_e_ev = 0.0;  // final energy - initial energy
  double max_force = 0.0;   // NEB force at exit
  int iterations = 0;
};

/// Nudged elastic band on the toy potential with the improved tangent
/// estimate. With climbing enabled the highest interior image drops its
/// spring force and inverts the true-force component along the tangent.
/// Image force evaluations are serial and the update deterministic.
NebResult run_neb(const vasp::CrystalStructure& initial,
                  const vasp::CrystalStructure& final,
                  std::vector<vasp::CrystalStructure> images,
                  const ToyPotentialParams& p, const ConvergenceCriteria& crit,
                  double spring_const = 5.0, bool climbing = false);

}  // namespace vaspflow::sim
