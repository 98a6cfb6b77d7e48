#include "vaspflow/sim/neb.hpp"

#include <cmath>

#include "vaspflow/errors.hpp"

namespace vaspflow::sim {

namespace {

constexpr double kCellTol = 1e-8;
constexpr double kMaxImageDisplacement = 0.1;  // angstrom per iteration

void check_compatible(const vasp::CrystalStructure& a,
                      const vasp::CrystalStructure& b) {
  if (a.species != b.species || a.counts != b.counts)
    throw Error(ErrorKind::SpeciesMismatch,
                "structures differ in species blocks");
  const Eigen::Matrix3d da =
      (vasp::effective_lattice(a) - vasp::effective_lattice(b)).cwiseAbs();
  if ((da.array() > kCellTol).any())
    throw Error(ErrorKind::CellMismatch,
                "cells differ by " + std::to_string(da.maxCoeff()) +
                    " angstrom; endpoints must share one cell");
}

Eigen::Matrix3Xd min_image_displacement(const Eigen::Matrix3d& lat,
                                        const Eigen::Matrix3Xd& frac_from,
                                        const Eigen::Matrix3Xd& frac_to) {
  Eigen::Matrix3Xd df = frac_to - frac_from;
  df = (df.array() - df.array().round()).matrix();
  return lat.transpose() * df;
}

double flat_dot(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  return (a.array() * b.array()).sum();
}

Eigen::Matrix3Xd mask_forces(const Eigen::Matrix3Xd& forces,
                             const vasp::CrystalStructure& s) {
  Eigen::Matrix3Xd out = forces;
  if (s.selective_dynamics)
    for (Eigen::Index i = 0; i < out.cols(); ++i)
      for (int c = 0; c < 3; ++c)
        if (!s.move_flags(c, i)) out(c, i) = 0.0;
  return out;
}

double max_atom_force(const Eigen::Matrix3Xd& forces) {
  double maxf = 0.0;
  for (Eigen::Index i = 0; i < forces.cols(); ++i)
    maxf = std::max(maxf, forces.col(i).norm());
  return maxf;
}

}  // namespace

std::vector<vasp::CrystalStructure> neb_interpolate(
    const vasp::CrystalStructure& initial, const vasp::CrystalStructure& final,
    int n_images) {
  vasp::validate(initial);
  vasp::validate(final);
  check_compatible(initial, final);
  if (n_images < 1)
    throw Error(ErrorKind::BadImageCount, "need at least one interior image");
  if (n_images > 64)
    throw Error(ErrorKind::BadImageCount, "more than 64 images unsupported");

  const Eigen::Matrix3Xd f0 = vasp::fractional_positions(initial);
  const Eigen::Matrix3Xd f1 = vasp::fractional_positions(final);
  Eigen::Matrix3Xd delta = f1 - f0;
  delta = (delta.array() - delta.array().round()).matrix();

  std::vector<vasp::CrystalStructure> images;
  images.reserve(static_cast<std::size_t>(n_images));
  for (int k = 1; k <= n_images; ++k) {
    const double t = static_cast<double>(k) / (n_images + 1);
    vasp::CrystalStructure img = initial;
    img.comment = "image " + std::to_string(k) + " of " + std::to_string(n_images);
    img.mode = vasp::CoordinateMode::Direct;
    img.positions = f0 + t * delta;
    images.push_back(std::move(img));
  }
  return images;
}

NebResult run_neb(const vasp::CrystalStructure& initial,
                  const vasp::CrystalStructure& final,
                  std::vector<vasp::CrystalStructure> images,
                  const ToyPotentialParams& p, const ConvergenceCriteria& crit,
                  double spring_const, bool climbing) {
  vasp::validate(initial);
  vasp::validate(final);
  check_compatible(initial, final);
  if (images.empty())
    throw Error(ErrorKind::BadImageCount, "need at least one interior image");
  for (const auto& img : images) {
    vasp::validate(img);
    check_compatible(initial, img);
  }
  if (!(spring_const > 0.0))
    throw Error(ErrorKind::BadPotentialParams, "spring constant must be positive");

  const int n_img = static_cast<int>(images.size());
  const Eigen::Matrix3d lat = vasp::effective_lattice(initial);

  auto to_work = [&](const vasp::CrystalStructure& s) {
    vasp::CrystalStructure w = s;
    w.scale = 1.0;
    w.lattice = lat;
    w.mode = vasp::CoordinateMode::Cartesian;
    w.positions = vasp::cartesian_positions(s);
    return w;
  };
  auto frac_of = [&](const vasp::CrystalStructure& w) -> Eigen::Matrix3Xd {
    return lat.transpose().partialPivLu().solve(w.positions);
  };
  auto ensure_finite = [](double e, const Eigen::Matrix3Xd& f) {
    if (!std::isfinite(e) || !f.allFinite())
      throw Error(ErrorKind::NonFiniteEnergy,
                  "NEB force evaluation produced non-finite values");
  };

  const vasp::CrystalStructure w_init = to_work(initial);
  const vasp::CrystalStructure w_fin = to_work(final);
  std::vector<vasp::CrystalStructure> w_img;
  w_img.reserve(images.size());
  for (const auto& img : images) w_img.push_back(to_work(img));

  const EnergyForces ef_init = toy_energy_forces(w_init, p);
  const EnergyForces ef_fin = toy_energy_forces(w_fin, p);
  ensure_finite(ef_init.energy, ef_init.forces);
  ensure_finite(ef_fin.energy, ef_fin.forces);

  std::vector<double> energy(static_cast<std::size_t>(n_img), 0.0);
  std::vector<Eigen::Matrix3Xd> true_force(static_cast<std::size_t>(n_img));
  std::vector<Eigen::Matrix3Xd> neb_force(static_cast<std::size_t>(n_img));

  auto evaluate = [&]() {
    for (int i = 0; i < n_img; ++i) {
      const EnergyForces ef = toy_energy_forces(w_img[static_cast<std::size_t>(i)], p);
      ensure_finite(ef.energy, ef.forces);
      energy[static_cast<std::size_t>(i)] = ef.energy;
      true_force[static_cast<std::size_t>(i)] =
          mask_forces(ef.forces, w_img[static_cast<std::size_t>(i)]);
    }
  };

  auto band_forces = [&]() -> double {
    int climb_index = -1;
    if (climbing) {
      climb_index = 0;
      for (int i = 1; i < n_img; ++i)
        if (energy[static_cast<std::size_t>(i)] >
            energy[static_cast<std::size_t>(climb_index)])
          climb_index = i;
    }
    double max_f = 0.0;
    for (int i = 0; i < n_img; ++i) {
      const auto& w = w_img[static_cast<std::size_t>(i)];
      const auto& w_prev = i == 0 ? w_init : w_img[static_cast<std::size_t>(i - 1)];
      const auto& w_next =
          i == n_img - 1 ? w_fin : w_img[static_cast<std::size_t>(i + 1)];
      const double e_prev =
          i == 0 ? ef_init.energy : energy[static_cast<std::size_t>(i - 1)];
      const double e_next =
          i == n_img - 1 ? ef_fin.energy : energy[static_cast<std::size_t>(i + 1)];
      const double e_here = energy[static_cast<std::size_t>(i)];

      const Eigen::Matrix3Xd tau_plus =
          min_image_displacement(lat, frac_of(w), frac_of(w_next));
      const Eigen::Matrix3Xd tau_minus =
          min_image_displacement(lat, frac_of(w_prev), frac_of(w));

      Eigen::Matrix3Xd tau;
      if (e_next > e_here && e_here > e_prev) {
        tau = tau_plus;
      } else if (e_next < e_here && e_here < e_prev) {
        tau = tau_minus;
      } else {
        const double d_max =
            std::max(std::abs(e_next - e_here), std::abs(e_prev - e_here));
        const double d_min =
            std::min(std::abs(e_next - e_here), std::abs(e_prev - e_here));
        tau = e_next > e_prev ? (tau_plus * d_max + tau_minus * d_min).eval()
                              : (tau_plus * d_min + tau_minus * d_max).eval();
      }
      const double tau_norm = std::sqrt(flat_dot(tau, tau));
      const auto& f_true = true_force[static_cast<std::size_t>(i)];
      Eigen::Matrix3Xd f;
      if (tau_norm < 1e-14) {
        f = f_true;
      } else {
        tau /= tau_norm;
        const double f_parallel = flat_dot(f_true, tau);
        if (i == climb_index) {
          f = f_true - 2.0 * f_parallel * tau;
        } else {
          const double len_plus = std::sqrt(flat_dot(tau_plus, tau_plus));
          const double len_minus = std::sqrt(flat_dot(tau_minus, tau_minus));
          f = f_true - f_parallel * tau +
              spring_const * (len_plus - len_minus) * tau;
        }
      }
      f = mask_forces(f, w);
      neb_force[static_cast<std::size_t>(i)] = f;
      max_f = std::max(max_f, max_atom_force(f));
    }
    return max_f;
  };

  evaluate();
  double max_f = band_forces();
  const double step0 = crit.step_size / std::max(1.0, max_f);
  double eta = step0;
  double prev_max_f = max_f;

  NebResult result;
  while (max_f > crit.force_tol && result.iterations < crit.max_ionic_steps) {
    for (int i = 0; i < n_img; ++i) {
      Eigen::Matrix3Xd step = eta * neb_force[static_cast<std::size_t>(i)];
      double longest = 0.0;
      for (Eigen::Index a = 0; a < step.cols(); ++a)
        longest = std::max(longest, step.col(a).norm());
      if (longest > kMaxImageDisplacement)
        step *= kMaxImageDisplacement / longest;
      w_img[static_cast<std::size_t>(i)].positions += step;
    }
    ++result.iterations;
    evaluate();
    max_f = band_forces();
    eta = max_f < prev_max_f ? std::min(eta * 1.05, 20.0 * step0)
                             : std::max(eta * 0.5, 1e-3 * step0);
    prev_max_f = max_f;
  }

  result.converged = max_f <= crit.force_tol;
  result.max_force = max_f;

  result.band.reserve(static_cast<std::size_t>(n_img) + 2);
  result.energies.reserve(static_cast<std::size_t>(n_img) + 2);
  auto restore = [&](const vasp::CrystalStructure& original,
                     const vasp::CrystalStructure& w) {
    vasp::CrystalStructure out = original;
    if (original.mode == vasp::CoordinateMode::Direct)
      out.positions = lat.transpose().partialPivLu().solve(w.positions);
    else
      out.positions = w.positions / original.scale;
    return out;
  };
  result.band.push_back(initial);
  result.energies.push_back(ef_init.energy);
  for (int i = 0; i < n_img; ++i) {
    result.band.push_back(restore(images[static_cast<std::size_t>(i)],
                                  w_img[static_cast<std::size_t>(i)]));
    result.energies.push_back(energy[static_cast<std::size_t>(i)]);
  }
  result.band.push_back(final);
  result.energies.push_back(ef_fin.energy);

  double peak = result.energies.front();
  for (const double e : result.energies) peak = std::max(peak, e);
  result.barrier_ev = peak - result.energies.front();
  result.delta_e_ev = result.energies.back() - result.energies.front();
  return result;
}

}  // namespace vaspflow::sim
