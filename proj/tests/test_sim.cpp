#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "vaspflow/errors.hpp"
#include "vaspflow/sim/neb.hpp"
#include "vaspflow/sim/potential.hpp"
#include "vaspflow/sim/registry.hpp"
#include "vaspflow/sim/relax.hpp"
#include "vaspflow/vasp/incar.hpp"
#include "vaspflow/vasp/structure.hpp"

using namespace vaspflow;

namespace {

vasp::CrystalStructure dimer(const std::string& a, const std::string& b,
                             double separation, double box = 20.0) {
  vasp::CrystalStructure s;
  s.comment = a + "-" + b + " dimer";
  s.lattice = box * Eigen::Matrix3d::Identity();
  if (a == b) {
    s.species = {a};
    s.counts = {2};
  } else {
    s.species = {a, b};
    s.counts = {1, 1};
  }
  s.mode = vasp::CoordinateMode::Cartesian;
  s.positions.resize(3, 2);
  s.positions.col(0) = Eigen::Vector3d(box / 2 - separation / 2, box / 2, box / 2);
  s.positions.col(1) = Eigen::Vector3d(box / 2 + separation / 2, box / 2, box / 2);
  return s;
}

double dimer_separation(const vasp::CrystalStructure& s) {
  const auto cart = vasp::cartesian_positions(s);
  return (cart.col(1) - cart.col(0)).norm();
}

vasp::CrystalStructure lone_atom(const Eigen::Vector3d& frac, double box = 10.0) {
  vasp::CrystalStructure s;
  s.comment = "lone atom";
  s.lattice = box * Eigen::Matrix3d::Identity();
  s.species = {"H"};
  s.counts = {1};
  s.mode = vasp::CoordinateMode::Direct;
  s.positions.resize(3, 1);
  s.positions.col(0) = frac;
  return s;
}

/// Random cartesian boxes whose pair distances stay away from both the
/// repulsive wall and the cutoff, keeping finite differences well behaved.
vasp::CrystalStructure random_box(std::mt19937& rng, int n_atoms,
                                  const sim::ToyPotentialParams& p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double box = 16.0;
  vasp::CrystalStructure s;
  s.comment = "random box";
  s.lattice = box * Eigen::Matrix3d::Identity();
  s.species = {"Si", "O"};
  s.counts = {n_atoms / 2, n_atoms - n_atoms / 2};
  s.mode = vasp::CoordinateMode::Cartesian;
  s.positions.resize(3, n_atoms);
  for (int i = 0; i < n_atoms; ++i) {
    for (int attempt = 0;; ++attempt) {
      REQUIRE(attempt < 10000);
      Eigen::Vector3d cand(box * unit(rng), box * unit(rng), box * unit(rng));
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        Eigen::Vector3d d = (cand - s.positions.col(j)) / box;
        d -= d.array().round().matrix();
        const double r = (box * d).norm();
        if (r < 1.9 || std::abs(r - p.cutoff) < 1e-3) ok = false;
      }
      if (ok) {
        s.positions.col(i) = cand;
        break;
      }
    }
  }
  return s;
}

const double kMinScale = std::pow(2.0, 1.0 / 6.0);

}  // namespace

TEST_CASE("single atom has zero energy and forces") {
  const auto s = lone_atom({0.5, 0.5, 0.5}, 12.0);
  const auto ef = sim::toy_energy_forces(s, {});
  CHECK(ef.energy == 0.0);
  CHECK(ef.forces.norm() == 0.0);
}

TEST_CASE("dimer at the potential minimum feels no force") {
  sim::ToyPotentialParams p;
  const double r_min = kMinScale * p.pair_sigma;
  const auto ef = sim::toy_energy_forces(dimer("Ar", "Ar", r_min), p);

  const double sc6 = std::pow(p.pair_sigma / p.cutoff, 6);
  const double expected = -p.pair_epsilon + 4.0 * p.pair_epsilon * (sc6 - sc6 * sc6);
  CHECK(ef.energy == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ef.forces.col(0).norm() < 1e-12);
  CHECK(ef.forces.col(1).norm() < 1e-12);
}

TEST_CASE("energy is shifted to zero at the cutoff") {
  sim::ToyPotentialParams p;
  const auto just_inside = sim::toy_energy_forces(dimer("Ar", "Ar", p.cutoff - 1e-9), p);
  CHECK(std::abs(just_inside.energy) < 1e-9);
  const auto at_cutoff = sim::toy_energy_forces(dimer("Ar", "Ar", p.cutoff), p);
  CHECK(at_cutoff.energy == 0.0);
  CHECK(at_cutoff.forces.norm() == 0.0);
  const auto beyond = sim::toy_energy_forces(dimer("Ar", "Ar", p.cutoff + 0.3), p);
  CHECK(beyond.energy == 0.0);
}

TEST_CASE("species pair overrides are symmetric and honored") {
  sim::ToyPotentialParams p;
  p.set_pair("Pd", "H", {0.35, 1.7});
  CHECK(p.coeffs("H", "Pd").sigma == 1.7);
  CHECK(p.coeffs("Pd", "H").epsilon == 0.35);
  CHECK(p.coeffs("Pd", "Pd").sigma == p.pair_sigma);

  const double r_min = kMinScale * 1.7;
  const auto ef = sim::toy_energy_forces(dimer("Pd", "H", r_min), p);
  const double sc6 = std::pow(1.7 / p.cutoff, 6);
  const double expected = -0.35 + 4.0 * 0.35 * (sc6 - sc6 * sc6);
  CHECK(ef.energy == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ef.forces.col(0).norm() < 1e-12);
}

TEST_CASE("bad potential parameters are rejected") {
  sim::ToyPotentialParams p;
  p.pair_epsilon = -0.1;
  CHECK_THROWS_AS(sim::validate_params(p), Error);
  p.pair_epsilon = 0.4;
  p.cutoff = 1.0;  // below the default sigma
  CHECK_THROWS_AS(sim::validate_params(p), Error);
  p.cutoff = 5.0;
  p.set_pair("A", "B", {0.1, 6.0});  // sigma above the cutoff
  CHECK_THROWS_AS(sim::validate_params(p), Error);
}

TEST_CASE("cutoff larger than half the cell height is refused") {
  sim::ToyPotentialParams p;
  try {
    sim::toy_energy_forces(dimer("Ar", "Ar", 2.5, 8.0), p);
    FAIL("expected CellTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CellTooSmall);
  }
  CHECK_NOTHROW(sim::toy_energy_forces(dimer("Ar", "Ar", 2.5, 10.5), p));
}

TEST_CASE("analytic forces agree with central finite differences") {
  sim::ToyPotentialParams p;
  std::mt19937 rng(20260815);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_box(rng, 8, p);
    const auto ef = sim::toy_energy_forces(s, p);
    double worst = 0.0;
    for (int i = 0; i < 8; ++i)
      for (int c = 0; c < 3; ++c) {
        auto plus = s;
        auto minus = s;
        plus.positions(c, i) += h;
        minus.positions(c, i) -= h;
        const double dedx = (sim::toy_energy_forces(plus, p).energy -
                             sim::toy_energy_forces(minus, p).energy) /
                            (2.0 * h);
        worst = std::max(worst, std::abs(dedx + ef.forces(c, i)));
      }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("rigid translation leaves energy and forces unchanged") {
  sim::ToyPotentialParams p;
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = random_box(rng, 8, p);
    const auto base = sim::toy_energy_forces(s, p);
    auto moved = s;
    const Eigen::Vector3d t(1.234, -0.77, 3.1);
    for (int i = 0; i < 8; ++i) moved.positions.col(i) += t;
    const auto shifted = sim::toy_energy_forces(moved, p);
    CHECK(std::abs(shifted.energy - base.energy) < 1e-10);
    CHECK((shifted.forces - base.forces).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("structure already below the force tolerance is a fixed point") {
  sim::ToyPotentialParams p;
  const auto s = dimer("Ar", "Ar", kMinScale * p.pair_sigma);
  sim::ConvergenceCriteria crit;
  const auto result = sim::relax_structure(s, p, crit);
  CHECK(result.converged);
  CHECK(result.steps_taken == 0);
  CHECK(result.trace.size() == 1);
  CHECK(vasp::structurally_equal(s, result.relaxed, 1e-14));
}

TEST_CASE("perturbed dimer relaxes back to the analytic minimum") {
  sim::ToyPotentialParams p;
  const double r_min = kMinScale * p.pair_sigma;
  sim::ConvergenceCriteria crit;
  crit.force_tol = 1e-3;
  crit.max_ionic_steps = 500;
  const auto result = sim::relax_structure(dimer("Ar", "Ar", r_min + 0.1), p, crit);
  CHECK(result.converged);
  CHECK(std::abs(dimer_separation(result.relaxed) - r_min) <= 1e-3);
  CHECK(result.max_force <= crit.force_tol);
}

TEST_CASE("zero step budget evaluates once and reports not converged") {
  sim::ToyPotentialParams p;
  const auto s = dimer("Ar", "Ar", kMinScale * p.pair_sigma + 0.2);
  sim::ConvergenceCriteria crit;
  crit.max_ionic_steps = 0;
  const auto result = sim::relax_structure(s, p, crit);
  CHECK_FALSE(result.converged);
  CHECK(result.trace.size() == 1);
  CHECK(result.steps_taken == 0);
  CHECK(vasp::structurally_equal(s, result.relaxed, 1e-14));
}

TEST_CASE("relaxation energy trace never increases") {
  sim::ToyPotentialParams p;
  std::mt19937 rng(99);
  auto s = random_box(rng, 8, p);
  sim::ConvergenceCriteria crit;
  crit.force_tol = 1e-3;
  crit.max_ionic_steps = 300;
  const auto result = sim::relax_structure(s, p, crit);
  REQUIRE(result.trace.size() >= 2);
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i] <= result.trace[i - 1] + 1e-12);
  CHECK(result.steps_taken == static_cast<int>(result.trace.size()) - 1);
}

TEST_CASE("frozen selective dynamics components stay put") {
  sim::ToyPotentialParams p;
  auto s = dimer("Ar", "Ar", kMinScale * p.pair_sigma + 0.15);
  s.selective_dynamics = true;
  s.move_flags.resize(3, 2);
  s.move_flags.col(0).setConstant(false);
  s.move_flags.col(1).setConstant(true);
  const Eigen::Vector3d anchor = s.positions.col(0);

  sim::ConvergenceCriteria crit;
  crit.force_tol = 1e-3;
  crit.max_ionic_steps = 500;
  const auto result = sim::relax_structure(s, p, crit);
  CHECK(result.converged);
  CHECK((result.relaxed.positions.col(0) - anchor).norm() == 0.0);
  CHECK(std::abs(dimer_separation(result.relaxed) - kMinScale * p.pair_sigma) <= 1e-3);

  // freezing single components pins exactly those
  auto partial = dimer("Ar", "Ar", kMinScale * p.pair_sigma + 0.15);
  partial.selective_dynamics = true;
  partial.move_flags.resize(3, 2);
  partial.move_flags.setConstant(true);
  partial.move_flags(1, 1) = false;
  partial.move_flags(2, 1) = false;
  const double y1 = partial.positions(1, 1);
  const double z1 = partial.positions(2, 1);
  const auto pres = sim::relax_structure(partial, p, crit);
  CHECK(pres.relaxed.positions(1, 1) == y1);
  CHECK(pres.relaxed.positions(2, 1) == z1);
}

TEST_CASE("relaxation is deterministic") {
  sim::ToyPotentialParams p;
  std::mt19937 rng(4242);
  const auto s = random_box(rng, 8, p);
  sim::ConvergenceCriteria crit;
  crit.force_tol = 1e-3;
  crit.max_ionic_steps = 200;
  const auto a = sim::relax_structure(s, p, crit);
  const auto b = sim::relax_structure(s, p, crit);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i] == b.trace[i]);
  CHECK((a.relaxed.positions - b.relaxed.positions).norm() == 0.0);
}

TEST_CASE("degenerate interpolation returns copies of the endpoint") {
  const auto s = lone_atom({0.3, 0.4, 0.5});
  const auto images = sim::neb_interpolate(s, s, 3);
  REQUIRE(images.size() == 3);
  for (const auto& img : images) {
    CHECK(img.mode == vasp::CoordinateMode::Direct);
    CHECK((img.positions - s.positions).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(img.species == s.species);
  }
  CHECK(images[0].comment == "image 1 of 3");
}

TEST_CASE("interpolation is linear in fractional coordinates") {
  const auto initial = lone_atom({0.1, 0.2, 0.3});
  const auto final_s = lone_atom({0.3, 0.2, 0.3});
  const auto images = sim::neb_interpolate(initial, final_s, 4);
  REQUIRE(images.size() == 4);
  const double offsets[] = {0.04, 0.08, 0.12, 0.16};
  for (int k = 0; k < 4; ++k) {
    CHECK(images[k].positions(0, 0) ==
          doctest::Approx(0.1 + offsets[k]).epsilon(1e-12));
    CHECK(images[k].positions(1, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(images[k].positions(2, 0) == doctest::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("interpolation follows the minimum image across the boundary") {
  const auto initial = lone_atom({0.95, 0.5, 0.5});
  const auto final_s = lone_atom({0.15, 0.5, 0.5});
  const auto images = sim::neb_interpolate(initial, final_s, 4);
  // displacement is +0.2 through the cell face, not -0.8 across the cell
  CHECK(images[0].positions(0, 0) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(images[1].positions(0, 0) == doctest::Approx(1.03).epsilon(1e-12));
  CHECK(images[3].positions(0, 0) == doctest::Approx(1.11).epsilon(1e-12));
}

TEST_CASE("interpolation rejects mismatched inputs") {
  const auto initial = lone_atom({0.1, 0.2, 0.3});

  auto shifted_cell = lone_atom({0.3, 0.2, 0.3});
  shifted_cell.lattice(0, 0) += 0.01;
  try {
    sim::neb_interpolate(initial, shifted_cell, 3);
    FAIL("expected CellMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CellMismatch);
  }

  auto barely_off = lone_atom({0.3, 0.2, 0.3});
  barely_off.lattice(0, 0) += 1e-9;
  CHECK_NOTHROW(sim::neb_interpolate(initial, barely_off, 3));

  auto other_species = lone_atom({0.3, 0.2, 0.3});
  other_species.species = {"He"};
  try {
    sim::neb_interpolate(initial, other_species, 3);
    FAIL("expected SpeciesMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SpeciesMismatch);
  }

  const auto final_s = lone_atom({0.3, 0.2, 0.3});
  CHECK_THROWS_AS(sim::neb_interpolate(initial, final_s, 0), Error);
  CHECK_THROWS_AS(sim::neb_interpolate(initial, final_s, 65), Error);
  CHECK_NOTHROW(sim::neb_interpolate(initial, final_s, 64));
}

TEST_CASE("interpolating the reversed path mirrors the image list") {
  vasp::CrystalStructure initial = lone_atom({0.12, 0.34, 0.56});
  initial.species = {"H"};
  vasp::CrystalStructure final_s = initial;
  final_s.positions.col(0) = Eigen::Vector3d(0.42, 0.14, 0.76);

  const auto fwd = sim::neb_interpolate(initial, final_s, 5);
  const auto rev = sim::neb_interpolate(final_s, initial, 5);
  REQUIRE(fwd.size() == rev.size());
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    const auto& mirrored = rev[rev.size() - 1 - k];
    CHECK((fwd[k].positions - mirrored.positions).cwiseAbs().maxCoeff() < 1e-12);
  }
}

namespace {

/// Two fixed anchors with a mobile H between them: a clean double well whose
/// saddle sits midway by symmetry.
struct HopSystem {
  vasp::CrystalStructure initial;
  vasp::CrystalStructure final_s;
  sim::ToyPotentialParams params;
  double x_left = 0.0;
  double x_right = 0.0;

  HopSystem() {
    params.cutoff = 5.0;
    params.set_pair("Pd", "Pd", {0.426, 2.451});
    params.set_pair("Pd", "H", {0.35, 1.7});
    params.set_pair("H", "H", {0.08, 2.0});
    const double box = 16.0;
    const double r_min = kMinScale * 1.7;
    vasp::CrystalStructure s;
    s.comment = "H hop between anchors";
    s.lattice = box * Eigen::Matrix3d::Identity();
    s.species = {"Pd", "H"};
    s.counts = {2, 1};
    s.mode = vasp::CoordinateMode::Cartesian;
    s.positions.resize(3, 3);
    s.positions.col(0) = Eigen::Vector3d(5.0, 8.0, 8.0);
    s.positions.col(1) = Eigen::Vector3d(11.0, 8.0, 8.0);
    s.selective_dynamics = true;
    s.move_flags.resize(3, 3);
    s.move_flags.setConstant(false);
    s.move_flags.col(2).setConstant(true);

    x_left = 5.0 + r_min;
    x_right = 11.0 - r_min;
    initial = s;
    initial.positions.col(2) = Eigen::Vector3d(x_left, 8.0, 8.0);
    final_s = s;
    final_s.positions.col(2) = Eigen::Vector3d(x_right, 8.0, 8.0);
  }

  double energy_at(double x) const {
    auto probe = initial;
    probe.positions(0, 2) = x;
    return sim::toy_energy_forces(probe, params).energy;
  }
};

}  // namespace

TEST_CASE("flat band converges immediately with zero barrier") {
  sim::ToyPotentialParams p;
  const auto s = dimer("Ar", "Ar", kMinScale * p.pair_sigma);
  const std::vector<vasp::CrystalStructure> images(3, s);
  sim::ConvergenceCriteria crit;
  crit.max_ionic_steps = 100;
  const auto result = sim::run_neb(s, s, images, p, crit, 5.0, false);
  CHECK(result.converged);
  CHECK(result.iterations == 0);
  CHECK(std::abs(result.barrier_ev) < 1e-12);
  CHECK(std::abs(result.delta_e_ev) < 1e-12);
  REQUIRE(result.band.size() == 5);
  REQUIRE(result.energies.size() == 5);
}

TEST_CASE("climbing image finds the hop barrier") {
  const HopSystem sys;
  auto images = sim::neb_interpolate(sys.initial, sys.final_s, 5);
  sim::ConvergenceCriteria crit;
  crit.force_tol = 5e-3;
  crit.max_ionic_steps = 3000;
  crit.step_size = 0.3;
  const auto result = sim::run_neb(sys.initial, sys.final_s, std::move(images),
                                   sys.params, crit, 5.0, true);
  CHECK(result.converged);
  CHECK(result.barrier_ev > 0.0);
  CHECK(std::abs(result.delta_e_ev) < 1e-9);  // symmetric wells

  // dense scan of the mobile coordinate bounds the true saddle height
  double peak = -1e300;
  const int grid = 4000;
  for (int g = 0; g <= grid; ++g) {
    const double x = sys.x_left + (sys.x_right - sys.x_left) * g / grid;
    peak = std::max(peak, sys.energy_at(x));
  }
  const double reference = peak - sys.energy_at(sys.x_left);
  CHECK(std::abs(result.barrier_ev - reference) <= 0.02 * reference);

  CHECK(result.delta_e_ev ==
        result.energies.back() - result.energies.front());
}

TEST_CASE("builtin registry knows the workflow tags") {
  const auto reg = sim::TagRegistry::builtin();
  CHECK(reg.tag_count() >= 40);
  CHECK(reg.find("ENCUT") != nullptr);
  CHECK(reg.find("encut") != nullptr);  // lookups are case-insensitive
  CHECK(reg.find("IMAGES") != nullptr);
  CHECK(reg.find("NOSUCHTAG") == nullptr);
  CHECK(reg.rules().size() >= 3);
}

namespace {

sim::ValidationReport check_deck(const std::string& incar_text,
                                 const sim::CrossStepContext& ctx = {}) {
  const auto doc = vasp::parse_incar(incar_text);
  return sim::validate_deck(doc, sim::TagRegistry::builtin(), ctx);
}

const char* kGoldenSr =
    "SYSTEM = vacancy relaxation\n"
    "ENCUT = 400\n"
    "EDIFF = 1e-6\n"
    "EDIFFG = -0.02\n"
    "IBRION = 2\n"
    "POTIM = 0.5\n"
    "NSW = 60\n"
    "ISIF = 2\n"
    "ISMEAR = 1\n"
    "SIGMA = 0.2\n";

const char* kGoldenBs =
    "SYSTEM = band structure\n"
    "ENCUT = 400\n"
    "EDIFF = 1e-6\n"
    "ICHARG = 11\n"
    "ISMEAR = 0\n"
    "SIGMA = 0.05\n"
    "LHFCALC = .TRUE.\n"
    "AEXX = 0.25\n"
    "HFSCREEN = 0.2\n"
    "NSW = 0\n"
    "IBRION = -1\n";

const char* kGoldenNeb =
    "SYSTEM = transition state search\n"
    "IMAGES = 3\n"
    "SPRING = -5\n"
    "LCLIMB = .TRUE.\n"
    "IBRION = 2\n"
    "POTIM = 0.3\n"
    "NSW = 100\n"
    "EDIFFG = -0.05\n"
    "ENCUT = 400\n"
    "EDIFF = 1e-5\n";

}  // namespace

TEST_CASE("golden decks validate cleanly") {
  CHECK(check_deck(kGoldenSr).ok());
  CHECK(check_deck(kGoldenBs).ok());
  CHECK(check_deck(kGoldenNeb).ok());
}

TEST_CASE("unknown tags are reported by name") {
  const auto report = check_deck("LHFCALX = .TRUE.\nENCUT = 400\n");
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].rule_id == "unknown_tag");
  CHECK(report.violations[0].tag == "LHFCALX");
}

TEST_CASE("IBRION and POTIM must be compatible") {
  CHECK(check_deck("IBRION = 0\nNSW = 100\n").has_rule("ibrion_potim"));
  CHECK(check_deck("IBRION = 2\nNSW = 10\n").has_rule("ibrion_potim"));
  CHECK(check_deck("IBRION = -1\nPOTIM = 0.5\n").has_rule("ibrion_potim"));
  CHECK_FALSE(check_deck("IBRION = 2\nPOTIM = 0.5\n").has_rule("ibrion_potim"));
  CHECK_FALSE(check_deck("IBRION = -1\nNSW = 0\n").has_rule("ibrion_potim"));
  CHECK_FALSE(check_deck("NSW = 0\n").has_rule("ibrion_potim"));
}

TEST_CASE("NEB cell consistency guards against ISIF=3 endpoints") {
  CHECK(check_deck("IMAGES = 3\nISIF = 3\nIBRION = 2\nPOTIM = 0.3\n")
            .has_rule("neb_cell_consistency"));

  sim::CrossStepContext ctx;
  ctx.facts["endpoint_isif"] = "3";
  CHECK(check_deck("IMAGES = 3\nIBRION = 2\nPOTIM = 0.3\n", ctx)
            .has_rule("neb_cell_consistency"));
  CHECK_FALSE(check_deck("IMAGES = 3\nIBRION = 2\nPOTIM = 0.3\n")
                  .has_rule("neb_cell_consistency"));
  // the rule is scoped to NEB decks
  CHECK_FALSE(check_deck("ISIF = 3\nIBRION = 2\nPOTIM = 0.4\n", ctx)
                  .has_rule("neb_cell_consistency"));
}

TEST_CASE("hybrid parameters require LHFCALC") {
  CHECK(check_deck("AEXX = 0.25\n").has_rule("hse_requires_lhfcalc"));
  CHECK(check_deck("HFSCREEN = 0.2\nLHFCALC = .FALSE.\n")
            .has_rule("hse_requires_lhfcalc"));
  CHECK_FALSE(check_deck("LHFCALC = .TRUE.\nAEXX = 0.25\n")
                  .has_rule("hse_requires_lhfcalc"));
}

TEST_CASE("value kinds and ranges are enforced") {
  auto single_rule = [](const std::string& text) {
    const auto report = check_deck(text);
    REQUIRE(report.violations.size() == 1);
    return report.violations[0].rule_id;
  };
  CHECK(single_rule("ENCUT = .TRUE.\n") == "wrong_value_kind");
  CHECK(single_rule("NSW = 3.5\n") == "wrong_value_kind");
  CHECK(single_rule("ENCUT = 10\n") == "out_of_range");
  CHECK(single_rule("ISMEAR = 5\n") == "out_of_range");
  CHECK(single_rule("PREC = Garbage\n") == "out_of_range");
  CHECK(check_deck("ENCUT = 450\n").ok());         // int widens to real
  CHECK(check_deck("MAGMOM = 1 2 3.5\n").ok());    // mixed list is a real list
  CHECK(check_deck("PREC = accurate\n").ok());     // enums match case-insensitively
  CHECK(check_deck("LREAL = .FALSE.\n").ok());     // logical spelling of a text tag
}

TEST_CASE("registry extension from JSON") {
  auto reg = sim::TagRegistry::builtin();
  const auto before = reg.tag_count();
  reg.extend_from_json(
      R"([{"tag": "LSORBIT", "kind": "bool", "description": "spin-orbit coupling"},
          {"tag": "NUPDOWN", "kind": "real", "min": -20, "max": 20}])");
  CHECK(reg.tag_count() == before + 2);
  REQUIRE(reg.find("LSORBIT") != nullptr);
  CHECK(reg.find("LSORBIT")->kind == vasp::TagKind::Bool);

  const auto doc = vasp::parse_incar("LSORBIT = .TRUE.\nNUPDOWN = 2\n");
  CHECK(sim::validate_deck(doc, reg).ok());
  CHECK_FALSE(sim::validate_deck(doc, sim::TagRegistry::builtin()).ok());

  CHECK_THROWS_AS(reg.extend_from_json("not json"), Error);
  CHECK_THROWS_AS(reg.extend_from_json(R"({"tag": "X"})"), Error);
  CHECK_THROWS_AS(reg.extend_from_json(R"([{"tag": "X"}])"), Error);
  CHECK_THROWS_AS(reg.extend_from_json(R"([{"tag": "X", "kind": "float"}])"), Error);
}

TEST_CASE("rules may only reference known tags") {
  sim::TagRegistry reg;
  sim::InterdependenceRule rule;
  rule.id = "orphan";
  rule.referenced_tags = {"MISSING"};
  rule.predicate = [](const vasp::IncarDocument&, const sim::CrossStepContext&)
      -> std::optional<sim::Violation> { return std::nullopt; };
  CHECK_THROWS_AS(reg.add_rule(rule), Error);
}

TEST_CASE("validation reports render every violation") {
  const auto report = check_deck("LHFCALX = 1\nENCUT = 10\nAEXX = 0.3\n");
  CHECK(report.violations.size() == 3);
  const auto text = report.to_string();
  CHECK(text.find("unknown_tag") != std::string::npos);
  CHECK(text.find("out_of_range") != std::string::npos);
  CHECK(text.find("hse_requires_lhfcalc") != std::string::npos);
  CHECK(check_deck(kGoldenSr).to_string() == "deck valid");
}
