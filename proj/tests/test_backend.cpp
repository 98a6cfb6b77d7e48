#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "vaspflow/detail/io.hpp"
#include "vaspflow/errors.hpp"
#include "vaspflow/sim/backend.hpp"
#include "vaspflow/sim/neb.hpp"
#include "vaspflow/vasp/outcar.hpp"
#include "vaspflow/vasp/poscar.hpp"
#include "vaspflow/vasp/potcar.hpp"

using namespace vaspflow;
namespace fs = std::filesystem;

namespace {

const char* kMeshKpoints =
    "Automatic mesh\n"
    "0\n"
    "Gamma\n"
    "2 2 2\n";

const char* kLineKpoints =
    "k path\n"
    "10\n"
    "Line-mode\n"
    "Reciprocal\n"
    "0.0 0.0 0.0 ! G\n"
    "0.5 0.0 0.5 ! X\n";

vasp::CrystalStructure pd_dimer(double separation, const std::string& comment) {
  vasp::CrystalStructure s;
  s.comment = comment;
  s.lattice = 20.0 * Eigen::Matrix3d::Identity();
  s.species = {"Pd"};
  s.counts = {2};
  s.mode = vasp::CoordinateMode::Cartesian;
  s.positions.resize(3, 2);
  s.positions.col(0) = Eigen::Vector3d(10.0 - separation / 2, 10.0, 10.0);
  s.positions.col(1) = Eigen::Vector3d(10.0 + separation / 2, 10.0, 10.0);
  return s;
}

void write_deck(const fs::path& dir, const std::string& incar,
                const vasp::CrystalStructure& poscar,
                const std::string& kpoints = kMeshKpoints) {
  detail::write_file(dir / "INCAR", incar);
  detail::write_file(dir / "KPOINTS", kpoints);
  detail::write_file(dir / "POSCAR", vasp::write_poscar(poscar));
  detail::write_file(dir / "POTCAR", vasp::write_potcar_stub(poscar.species));
}

double pd_minimum() { return std::pow(2.0, 1.0 / 6.0) * 2.451; }

sim::BackendConfig test_config() {
  auto config = sim::default_backend_config();
  config.bs_fixtures = {{"Si_primitive", 1.17, false, 4, 6},
                        {"ZnO_wurtzite", 3.37, true, 1, 1}};
  return config;
}

}  // namespace

TEST_CASE("static deck evaluates once and converges at the minimum") {
  const auto dir = test_support::make_temp_dir("static");
  write_deck(dir, "SYSTEM = static dimer\nNSW = 0\nIBRION = -1\n",
             pd_dimer(pd_minimum(), "Pd dimer"));
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  CHECK(outcome.mode == "static");
  REQUIRE(outcome.energy_trace.size() == 1);
  REQUIRE(outcome.final_structure.has_value());

  const auto summary = vasp::extract_outcar_summary(
      detail::read_file(dir / "OUTCAR"), vasp::default_outcar_patterns());
  CHECK(summary.converged);
  CHECK(summary.n_ionic_steps == 0);
  CHECK(summary.final_energy_ev ==
        doctest::Approx(outcome.energy_trace.front()).epsilon(1e-7));
}

TEST_CASE("relaxation deck converges and writes CONTCAR") {
  const auto dir = test_support::make_temp_dir("relax");
  const std::string incar =
      "SYSTEM = dimer relaxation\n"
      "ENCUT = 400\n"
      "EDIFF = 1e-6\n"
      "EDIFFG = -0.01\n"
      "IBRION = 2\n"
      "POTIM = 0.5\n"
      "NSW = 200\n"
      "ISIF = 2\n";
  write_deck(dir, incar, pd_dimer(pd_minimum() + 0.3, "Pd dimer rattled"));
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  CHECK(outcome.mode == "relaxation");
  CHECK(outcome.energy_trace.size() >= 2);
  for (std::size_t i = 1; i < outcome.energy_trace.size(); ++i)
    CHECK(outcome.energy_trace[i] <= outcome.energy_trace[i - 1] + 1e-12);

  const auto summary = vasp::extract_outcar_summary(
      detail::read_file(dir / "OUTCAR"), vasp::default_outcar_patterns());
  CHECK(summary.converged);
  CHECK(summary.n_ionic_steps ==
        static_cast<int>(outcome.energy_trace.size()) - 1);
  CHECK(summary.max_force_ev_per_a.has_value());
  CHECK(*summary.max_force_ev_per_a <= 0.01);

  const auto contcar =
      vasp::parse_poscar(detail::read_file(dir / "CONTCAR"));
  const auto cart = vasp::cartesian_positions(contcar);
  const double sep = (cart.col(1) - cart.col(0)).norm();
  CHECK(std::abs(sep - pd_minimum()) < 5e-3);
}

TEST_CASE("identical decks produce byte-identical outputs") {
  const std::string incar =
      "EDIFFG = -0.02\nIBRION = 2\nPOTIM = 0.5\nNSW = 120\n";
  const auto a = test_support::make_temp_dir("det-a");
  const auto b = test_support::make_temp_dir("det-b");
  const auto s = pd_dimer(pd_minimum() + 0.25, "Pd dimer");
  write_deck(a, incar, s);
  write_deck(b, incar, s);
  sim::run_simulation(a, test_config());
  sim::run_simulation(b, test_config());
  CHECK(detail::read_file(a / "OUTCAR") == detail::read_file(b / "OUTCAR"));
  CHECK(detail::read_file(a / "CONTCAR") == detail::read_file(b / "CONTCAR"));
}

TEST_CASE("validation failure yields diagnostics and no energy") {
  const auto dir = test_support::make_temp_dir("badtag");
  write_deck(dir, "LHFCALX = .TRUE.\nNSW = 10\nIBRION = 2\nPOTIM = 0.4\n",
             pd_dimer(pd_minimum(), "Pd dimer"));
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ValidationFailed);
  REQUIRE_FALSE(outcome.failed_rules.empty());
  CHECK(outcome.failed_rules[0] == "unknown_tag");
  CHECK_FALSE(fs::exists(dir / "CONTCAR"));

  const auto text = detail::read_file(dir / "OUTCAR");
  CHECK(text.find("unknown_tag") != std::string::npos);
  CHECK(text.find("LHFCALX") != std::string::npos);
  CHECK_THROWS_AS(vasp::extract_outcar_summary(
                      text, vasp::default_outcar_patterns()),
                  Error);
}

TEST_CASE("POTCAR order mismatch is a validation failure") {
  const auto dir = test_support::make_temp_dir("potcar");
  write_deck(dir, "NSW = 0\nIBRION = -1\n", pd_dimer(pd_minimum(), "Pd dimer"));
  detail::write_file(dir / "POTCAR", vasp::write_potcar_stub({"Cu"}));
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ValidationFailed);
  REQUIRE(outcome.failed_rules.size() == 1);
  CHECK(outcome.failed_rules[0] == "potcar_species_order");
}

TEST_CASE("missing inputs crash the run with a reason") {
  const auto dir = test_support::make_temp_dir("crash");
  detail::write_file(dir / "INCAR", "NSW = 0\n");
  detail::write_file(dir / "KPOINTS", kMeshKpoints);
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::Crashed);
  CHECK(outcome.reason.find("POSCAR") != std::string::npos);
  const auto text = detail::read_file(dir / "OUTCAR");
  CHECK(text.find("RUN ERROR") != std::string::npos);
  CHECK(text.find("TOTEN") == std::string::npos);
}

TEST_CASE("band structure deck reproduces the fixture gap") {
  const auto dir = test_support::make_temp_dir("bs");
  auto poscar = pd_dimer(2.4, "Si_primitive silicon reference cell");
  poscar.species = {"Si"};
  const std::string incar =
      "SYSTEM = band structure\n"
      "ICHARG = 11\n"
      "NSW = 0\n"
      "IBRION = -1\n"
      "LHFCALC = .TRUE.\n"
      "AEXX = 0.25\n"
      "HFSCREEN = 0.2\n";
  write_deck(dir, incar, poscar, kLineKpoints);
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  CHECK(outcome.mode == "band_structure");
  CHECK(outcome.notes.empty());

  const auto summary = vasp::extract_outcar_summary(
      detail::read_file(dir / "OUTCAR"), vasp::default_outcar_patterns());
  CHECK(summary.converged);
  CHECK(summary.final_energy_ev == doctest::Approx(-8.0));  // -4 eV per atom
  REQUIRE(summary.fermi_energy_ev.has_value());
  CHECK(*summary.fermi_energy_ev == doctest::Approx(-1.0 + 1.17 / 2).epsilon(1e-9));
  REQUIRE(summary.eigenvalue_table.has_value());

  const auto gap = vasp::band_gap_from_eigenvalues(summary);
  CHECK(gap.gap_ev == doctest::Approx(1.17).epsilon(1e-9));
  CHECK_FALSE(gap.direct);
  CHECK(gap.vbm_kpoint == 4);
  CHECK(gap.cbm_kpoint == 6);
}

TEST_CASE("missing hybrid tags degrade the emitted gap") {
  const auto dir = test_support::make_temp_dir("bs-semilocal");
  auto poscar = pd_dimer(2.4, "ZnO_wurtzite reference");
  poscar.species = {"Zn"};
  write_deck(dir, "ICHARG = 11\nNSW = 0\nIBRION = -1\n", poscar, kLineKpoints);
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  CHECK_FALSE(outcome.notes.empty());

  const auto summary = vasp::extract_outcar_summary(
      detail::read_file(dir / "OUTCAR"), vasp::default_outcar_patterns());
  const auto gap = vasp::band_gap_from_eigenvalues(summary);
  CHECK(gap.gap_ev == doctest::Approx(0.6 * 3.37).epsilon(1e-9));
  CHECK(gap.direct);
}

TEST_CASE("line mode KPOINTS alone selects band structure mode") {
  const auto dir = test_support::make_temp_dir("bs-line");
  auto poscar = pd_dimer(2.4, "Si_primitive");
  poscar.species = {"Si"};
  write_deck(dir, "NSW = 0\nIBRION = -1\n", poscar, kLineKpoints);
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.mode == "band_structure");
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
}

TEST_CASE("band structure deck for an unknown material crashes") {
  const auto dir = test_support::make_temp_dir("bs-unknown");
  write_deck(dir, "ICHARG = 11\nNSW = 0\nIBRION = -1\n",
             pd_dimer(2.4, "GaAs_zincblende"), kLineKpoints);
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::Crashed);
  CHECK(outcome.reason.find("GaAs_zincblende") != std::string::npos);
}

namespace {

/// Stages a full NEB working directory: endpoints in 00 and NN+1, the
/// interpolated interior images between them.
void stage_neb_dir(const fs::path& dir, const vasp::CrystalStructure& initial,
                   const vasp::CrystalStructure& final_s, int n_images,
                   const std::string& incar) {
  detail::write_file(dir / "INCAR", incar);
  detail::write_file(dir / "KPOINTS", kMeshKpoints);
  detail::write_file(dir / "POTCAR", vasp::write_potcar_stub(initial.species));
  const auto images = sim::neb_interpolate(initial, final_s, n_images);
  char name[16];
  auto sub = [&](int i) {
    std::snprintf(name, sizeof(name), "%02d", i);
    fs::create_directories(dir / name);
    return dir / name;
  };
  detail::write_file(sub(0) / "POSCAR", vasp::write_poscar(initial));
  for (int i = 0; i < n_images; ++i)
    detail::write_file(sub(i + 1) / "POSCAR",
                       vasp::write_poscar(images[static_cast<std::size_t>(i)]));
  detail::write_file(sub(n_images + 1) / "POSCAR", vasp::write_poscar(final_s));
}

vasp::CrystalStructure hop_endpoint(bool left) {
  const double r_min = std::pow(2.0, 1.0 / 6.0) * 1.7;
  vasp::CrystalStructure s;
  s.comment = "H hop between Pd anchors";
  s.lattice = 16.0 * Eigen::Matrix3d::Identity();
  s.species = {"Pd", "H"};
  s.counts = {2, 1};
  s.mode = vasp::CoordinateMode::Cartesian;
  s.positions.resize(3, 3);
  s.positions.col(0) = Eigen::Vector3d(5.0, 8.0, 8.0);
  s.positions.col(1) = Eigen::Vector3d(11.0, 8.0, 8.0);
  s.positions.col(2) =
      Eigen::Vector3d(left ? 5.0 + r_min : 11.0 - r_min, 8.0, 8.0);
  s.selective_dynamics = true;
  s.move_flags.resize(3, 3);
  s.move_flags.setConstant(false);
  s.move_flags.col(2).setConstant(true);
  return s;
}

const char* kNebIncar =
    "SYSTEM = H hop\n"
    "IMAGES = 3\n"
    "SPRING = -5\n"
    "LCLIMB = .TRUE.\n"
    "IBRION = 2\n"
    "POTIM = 0.3\n"
    "NSW = 3000\n"
    "EDIFFG = -0.01\n";

}  // namespace

TEST_CASE("NEB deck produces per-image outputs and a barrier") {
  const auto dir = test_support::make_temp_dir("neb");
  stage_neb_dir(dir, hop_endpoint(true), hop_endpoint(false), 3, kNebIncar);
  const auto config = test_config();
  const auto outcome = sim::run_simulation(dir, config);
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  CHECK(outcome.mode == "neb");
  REQUIRE(outcome.barrier_ev.has_value());
  CHECK(*outcome.barrier_ev > 0.0);
  REQUIRE(outcome.energy_trace.size() == 5);

  for (int i = 0; i <= 4; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "%02d", i);
    CHECK(fs::exists(dir / name / "OUTCAR"));
    CHECK(fs::exists(dir / name / "CONTCAR") == (i >= 1 && i <= 3));
  }
  const auto top = detail::read_file(dir / "OUTCAR");
  CHECK(top.find("NEB: barrier =") != std::string::npos);
  CHECK(top.find("free  energy   TOTEN") == std::string::npos);

  const auto profile = sim::read_neb_profile(dir);
  REQUIRE(profile.energies.size() == 5);
  CHECK(profile.barrier_ev == doctest::Approx(*outcome.barrier_ev).epsilon(1e-6));
  CHECK(profile.delta_e_ev == doctest::Approx(*outcome.delta_e_ev).epsilon(1e-6));
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(profile.energies[i] ==
          doctest::Approx(outcome.energy_trace[i]).epsilon(1e-6));
}

TEST_CASE("cross-step facts fail an NEB deck staged after ISIF=3 endpoints") {
  const auto dir = test_support::make_temp_dir("neb-isif");
  stage_neb_dir(dir, hop_endpoint(true), hop_endpoint(false), 3, kNebIncar);
  detail::write_file(dir / ".simstate.json", R"({"endpoint_isif": "3"})");
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ValidationFailed);
  REQUIRE(outcome.failed_rules.size() == 1);
  CHECK(outcome.failed_rules[0] == "neb_cell_consistency");
  CHECK_FALSE(fs::exists(dir / "00" / "OUTCAR"));
}

TEST_CASE("ISIF=3 relaxations run ions-only and note it") {
  const auto dir = test_support::make_temp_dir("isif3");
  write_deck(dir,
             "EDIFFG = -0.02\nIBRION = 2\nPOTIM = 0.5\nNSW = 150\nISIF = 3\n",
             pd_dimer(pd_minimum() + 0.2, "Pd dimer"));
  const auto before = vasp::parse_poscar(detail::read_file(dir / "POSCAR"));
  const auto outcome = sim::run_simulation(dir, test_config());
  CHECK(outcome.status == sim::SimStatus::ConvergedOk);
  REQUIRE_FALSE(outcome.notes.empty());
  CHECK(outcome.notes[0].find("ions only") != std::string::npos);

  const auto after = vasp::parse_poscar(detail::read_file(dir / "CONTCAR"));
  CHECK((vasp::effective_lattice(after) - vasp::effective_lattice(before))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  const auto state =
      nlohmann::json::parse(detail::read_file(dir / ".simstate.json"));
  CHECK(state.at("isif").get<int>() == 3);
  CHECK(state.at("ions_only").get<bool>() == true);
  CHECK(state.at("mode").get<std::string>() == "relaxation");
}

TEST_CASE("band structure fixtures parse from text") {
  const auto records = sim::parse_bs_fixtures(
      "# identifier gap flag vbm cbm\n"
      "Si_primitive 1.17 indirect 4 6\n"
      "\n"
      "ZnO_wurtzite 3.37 direct 1 1  # wide gap\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0].identifier == "Si_primitive");
  CHECK(records[0].gap_ev == 1.17);
  CHECK_FALSE(records[0].direct);
  CHECK(records[0].vbm_k == 4);
  CHECK(records[0].cbm_k == 6);
  CHECK(records[1].direct);

  CHECK_THROWS_AS(sim::parse_bs_fixtures("Si 1.17 indirect 4\n"), Error);
  CHECK_THROWS_AS(sim::parse_bs_fixtures("Si 1.17 maybe 4 6\n"), Error);
  CHECK_THROWS_AS(sim::parse_bs_fixtures("Si -0.5 direct 1 1\n"), Error);
  CHECK_THROWS_AS(sim::parse_bs_fixtures("Si 1.17 direct 4 6\n"), Error);
}

TEST_CASE("simulation status names are stable") {
  CHECK(std::string(sim::to_string(sim::SimStatus::ConvergedOk)) == "ConvergedOk");
  CHECK(std::string(sim::to_string(sim::SimStatus::ValidationFailed)) ==
        "ValidationFailed");
}
