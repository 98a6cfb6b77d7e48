#pragma once

#include <vector>

#include "vaspflow/sim/potential.hpp"
#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::sim {

struct ConvergenceCriteria {
  double force_tol = 0.05;   // eV/angstrom, per-atom force norm
  int max_ionic_steps = 60;  // NSW
  double step_size = 0.5;    // POTIM
};

/// IBRION 1 and 2 both map to damped gradient descent with backtracking;
/// they differ only in the initial step scaling (1 starts at half POTIM).
enum class DescentFlavor { QuasiNewton, ConjugateGradient };

struct RelaxResult {
  vasp::CrystalStructure relaxed;
  std::vector<double> trace;  // energy per recorded state, starts with E0
  bool converged = false;
  double max_force = 0.0;  // after masking frozen components
  int steps_taken = 0;
};

/// Damped gradient descent on the toy potential. The energy trace is
/// monotone non-increasing: a trial step that raises the energy is rejected
/// and the step length halved. Selective-dynamics flags freeze force
/// components before both stepping and the convergence test. Deterministic
/// for fixed inputs. Non-finite energies or forces raise NonFiniteEnergy.
RelaxResult relax_structure(const vasp::CrystalStructure& s,
                            const ToyPotentialParams& p,
                            const ConvergenceCriteria& crit,
                            DescentFlavor flavor = DescentFlavor::ConjugateGradient);

}  // namespace vaspflow::sim
