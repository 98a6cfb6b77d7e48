#include "vaspflow/sim/relax.hpp"

#include <cmath>

#include "vaspflow/errors.hpp"

namespace vaspflow::sim {

namespace {

constexpr double kMaxAtomDisplacement = 0.2;  // angstrom per accepted step

double masked_max_force(const Eigen::Matrix3Xd& forces,
                        const vasp::CrystalStructure& s) {
  double maxf = 0.0;
  for (Eigen::Index i = 0; i < forces.cols(); ++i) {
    Eigen::Vector3d f = forces.col(i);
    if (s.selective_dynamics)
      for (int c = 0; c < 3; ++c)
        if (!s.move_flags(c, i)) f(c) = 0.0;
    maxf = std::max(maxf, f.norm());
  }
  return maxf;
}

Eigen::Matrix3Xd masked(const Eigen::Matrix3Xd& forces,
                        const vasp::CrystalStructure& s) {
  Eigen::Matrix3Xd out = forces;
  if (s.selective_dynamics)
    for (Eigen::Index i = 0; i < out.cols(); ++i)
      for (int c = 0; c < 3; ++c)
        if (!s.move_flags(c, i)) out(c, i) = 0.0;
  return out;
}

void ensure_finite(const EnergyForces& ef) {
  if (!std::isfinite(ef.energy) || !ef.forces.allFinite())
    throw Error(ErrorKind::NonFiniteEnergy,
                "toy potential produced a non-finite energy or force");
}

}  // namespace

RelaxResult relax_structure(const vasp::CrystalStructure& s,
                            const ToyPotentialParams& p,
                            const ConvergenceCriteria& crit,
                            DescentFlavor flavor) {
  vasp::validate(s);
  if (!(crit.force_tol > 0.0))
    throw Error(ErrorKind::BadPotentialParams, "force_tol must be positive");
  if (crit.max_ionic_steps < 0)
    throw Error(ErrorKind::BadPotentialParams, "max_ionic_steps must be >= 0");

  // work in cartesian with the scale folded into the lattice
  vasp::CrystalStructure work = s;
  work.scale = 1.0;
  work.lattice = vasp::effective_lattice(s);
  work.mode = vasp::CoordinateMode::Cartesian;
  work.positions = vasp::cartesian_positions(s);

  RelaxResult result;
  EnergyForces ef = toy_energy_forces(work, p);
  ensure_finite(ef);
  result.trace.push_back(ef.energy);
  double max_force = masked_max_force(ef.forces, work);

  const double step0 =
      (flavor == DescentFlavor::QuasiNewton ? 0.5 : 1.0) * crit.step_size /
      std::max(1.0, max_force);
  double eta = step0;
  int rejects_in_a_row = 0;

  while (max_force > crit.force_tol &&
         result.steps_taken < crit.max_ionic_steps) {
    Eigen::Matrix3Xd step = eta * masked(ef.forces, work);
    double longest = 0.0;
    for (Eigen::Index i = 0; i < step.cols(); ++i)
      longest = std::max(longest, step.col(i).norm());
    if (longest > kMaxAtomDisplacement)
      step *= kMaxAtomDisplacement / longest;

    vasp::CrystalStructure trial = work;
    trial.positions = work.positions + step;
    EnergyForces trial_ef = toy_energy_forces(trial, p);
    ensure_finite(trial_ef);

    if (trial_ef.energy > result.trace.back()) {
      eta *= 0.5;
      if (++rejects_in_a_row > 60) break;  // step length exhausted
      continue;
    }
    rejects_in_a_row = 0;
    work.positions = trial.positions;
    ef = trial_ef;
    result.trace.push_back(ef.energy);
    ++result.steps_taken;
    max_force = masked_max_force(ef.forces, work);
    eta = std::min(eta * 1.1, 50.0 * step0);
  }

  result.converged = max_force <= crit.force_tol;
  result.max_force = max_force;

  // return in the caller's conventions (original scale, lattice, mode)
  result.relaxed = s;
  if (s.mode == vasp::CoordinateMode::Direct) {
    const Eigen::Matrix3d lat_t = vasp::effective_lattice(s).transpose();
    result.relaxed.positions = lat_t.partialPivLu().solve(work.positions);
  } else {
    result.relaxed.positions = work.positions / s.scale;
  }
  return result;
}

}  // namespace vaspflow::sim
