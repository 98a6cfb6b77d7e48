#include "vaspflow/sim/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "vaspflow/detail/io.hpp"
#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"
#include "vaspflow/vasp/incar.hpp"
#include "vaspflow/vasp/kpoints.hpp"
#include "vaspflow/vasp/outcar.hpp"
#include "vaspflow/vasp/poscar.hpp"
#include "vaspflow/vasp/potcar.hpp"

namespace vaspflow::sim {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStateFile = ".simstate.json";
constexpr const char* kSentinel =
    " reached required accuracy - stopping structural energy minimisation\n";

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string subdir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", index);
  return buf;
}

std::string require_file(const fs::path& dir, const std::string& rel) {
  const fs::path path = dir / rel;
  if (!fs::exists(path))
    throw Error(ErrorKind::IoError, "missing input file: " + rel);
  return detail::read_file(path);
}

CrossStepContext read_cross_step(const fs::path& dir) {
  CrossStepContext ctx;
  const fs::path path = dir / kStateFile;
  if (!fs::exists(path)) return ctx;
  try {
    const auto doc = nlohmann::json::parse(detail::read_file(path));
    if (doc.is_object())
      for (const auto& [key, value] : doc.items()) {
        if (value.is_string())
          ctx.facts[key] = value.get<std::string>();
        else
          ctx.facts[key] = value.dump();
      }
  } catch (const std::exception&) {
    // an unreadable sidecar never blocks a run
  }
  return ctx;
}

void update_state(const fs::path& dir,
                  const std::map<std::string, nlohmann::json>& updates) {
  nlohmann::json doc = nlohmann::json::object();
  const fs::path path = dir / kStateFile;
  if (fs::exists(path)) {
    try {
      doc = nlohmann::json::parse(detail::read_file(path));
      if (!doc.is_object()) doc = nlohmann::json::object();
    } catch (const std::exception&) {
      doc = nlohmann::json::object();
    }
  }
  for (const auto& [key, value] : updates) doc[key] = value;
  detail::write_file(path, doc.dump(2) + "\n");
}

struct DeckContext {
  vasp::IncarDocument incar;
  vasp::KpointsSpec kpoints;
  bool bs_mode = false;
  std::optional<long long> images;
  ConvergenceCriteria crit;
  DescentFlavor flavor = DescentFlavor::ConjugateGradient;
};

std::string outcar_preamble(const std::string& comment) {
  std::string out = " vaspflow toy backend\n";
  if (!comment.empty()) out += " POSCAR: " + comment + '\n';
  return out;
}

std::string relaxation_outcar(const std::string& comment,
                              const std::vector<double>& trace,
                              double max_force, bool converged) {
  std::ostringstream out;
  out << outcar_preamble(comment);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << "--------------------------------------- Iteration " << (i + 1)
        << '\n';
    out << "  free  energy   TOTEN  =  " << fmt("%.8f", trace[i]) << " eV\n";
  }
  out << "  FORCES: max atom force =  " << fmt("%.6f", max_force) << " eV/A\n";
  if (converged) out << kSentinel;
  return out.str();
}

void check_potcar(const fs::path& dir, const vasp::CrystalStructure& poscar,
                  ValidationReport& report) {
  const auto info = vasp::parse_potcar(require_file(dir, "POTCAR"));
  if (info.species != poscar.species)
    report.violations.push_back(
        {"potcar_species_order", "POTCAR",
         "POTCAR species order does not match the POSCAR species line"});
}

}  // namespace

std::vector<BsRecord> parse_bs_fixtures(const std::string& text) {
  std::vector<BsRecord> records;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    const auto cut = line.find('#');
    if (cut != std::string_view::npos) line = line.substr(0, cut);
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 5)
      throw Error(ErrorKind::ConfigError,
                  "fixture line " + std::to_string(ln + 1) +
                      " needs: identifier gap direct|indirect vbm_k cbm_k");
    BsRecord rec;
    rec.identifier = std::string(toks[0]);
    const auto gap = detail::to_double(toks[1]);
    const auto vbm = detail::to_int(toks[3]);
    const auto cbm = detail::to_int(toks[4]);
    if (!gap || *gap < 0.0 || !vbm || *vbm < 1 || !cbm || *cbm < 1)
      throw Error(ErrorKind::ConfigError,
                  "bad fixture values on line " + std::to_string(ln + 1));
    if (detail::iequals(toks[2], "direct"))
      rec.direct = true;
    else if (detail::iequals(toks[2], "indirect"))
      rec.direct = false;
    else
      throw Error(ErrorKind::ConfigError,
                  "fixture flag must be direct or indirect, got '" +
                      std::string(toks[2]) + "'");
    rec.gap_ev = *gap;
    rec.vbm_k = static_cast<int>(*vbm);
    rec.cbm_k = static_cast<int>(*cbm);
    if (rec.direct != (rec.vbm_k == rec.cbm_k))
      throw Error(ErrorKind::ConfigError,
                  "fixture " + rec.identifier +
                      ": direct flag contradicts the k-indices");
    records.push_back(std::move(rec));
  }
  return records;
}

BackendConfig default_backend_config() {
  BackendConfig config;
  auto& p = config.potential;
  p.pair_epsilon = 0.4;
  p.pair_sigma = 2.2;
  p.cutoff = 5.0;
  p.set_pair("Al", "Al", {0.392, 2.551});
  p.set_pair("Cu", "Cu", {0.415, 2.277});
  p.set_pair("Pd", "Pd", {0.426, 2.451});
  p.set_pair("Ag", "Ag", {0.345, 2.574});
  p.set_pair("Pd", "H", {0.350, 1.700});
  p.set_pair("Ag", "H", {0.220, 1.780});
  p.set_pair("H", "H", {0.080, 2.000});
  p.set_pair("C", "O", {1.000, 1.100});
  p.set_pair("Pd", "C", {0.520, 2.050});
  p.set_pair("Pd", "O", {0.460, 1.950});
  p.set_pair("C", "C", {0.350, 2.200});
  p.set_pair("O", "O", {0.300, 2.100});
  return config;
}

const char* to_string(SimStatus status) {
  switch (status) {
    case SimStatus::ConvergedOk: return "ConvergedOk";
    case SimStatus::NotConverged: return "NotConverged";
    case SimStatus::ValidationFailed: return "ValidationFailed";
    case SimStatus::Crashed: return "Crashed";
  }
  return "Unknown";
}

namespace {

SimOutcome run_inner(const fs::path& dir, const BackendConfig& config) {
  SimOutcome outcome;
  auto write_out = [&o = outcome, &dir](const std::string& rel,
                                        const std::string& content) {
    detail::write_file(dir / rel, content);
    o.files_written.push_back(rel);
  };

  if (!fs::is_directory(dir))
    throw Error(ErrorKind::IoError,
                "working directory " + dir.string() + " does not exist");

  DeckContext deck;
  deck.incar = vasp::parse_incar(require_file(dir, "INCAR"));
  deck.kpoints = vasp::parse_kpoints(require_file(dir, "KPOINTS"));
  deck.images = deck.incar.get_int("IMAGES");
  deck.bs_mode = !deck.images &&
                 (deck.incar.get_int("ICHARG").value_or(0) == 11 ||
                  deck.kpoints.mode == vasp::KpointsMode::ExplicitLine);

  const double ediffg = deck.incar.get_real("EDIFFG").value_or(0.0);
  deck.crit.force_tol =
      ediffg < 0.0 ? -ediffg : config.default_force_tol;
  deck.crit.step_size = deck.incar.get_real("POTIM").value_or(config.default_potim);
  deck.crit.max_ionic_steps = static_cast<int>(
      deck.incar.get_int("NSW").value_or(deck.images ? config.default_neb_steps : 0));
  deck.flavor = deck.incar.get_int("IBRION").value_or(2) == 1
                    ? DescentFlavor::QuasiNewton
                    : DescentFlavor::ConjugateGradient;

  const CrossStepContext cross = read_cross_step(dir);
  ValidationReport report = validate_deck(deck.incar, config.registry, cross);

  const auto isif = deck.incar.get_int("ISIF");

  if (deck.images) {
    outcome.mode = "neb";
    const int n = static_cast<int>(*deck.images);
    const auto initial =
        vasp::parse_poscar(require_file(dir, subdir_name(0) + "/POSCAR"));
    const auto final_s =
        vasp::parse_poscar(require_file(dir, subdir_name(n + 1) + "/POSCAR"));
    std::vector<vasp::CrystalStructure> images;
    for (int i = 1; i <= n; ++i)
      images.push_back(
          vasp::parse_poscar(require_file(dir, subdir_name(i) + "/POSCAR")));
    check_potcar(dir, initial, report);

    if (!report.ok()) {
      outcome.status = SimStatus::ValidationFailed;
      for (const auto& v : report.violations)
        if (std::find(outcome.failed_rules.begin(), outcome.failed_rules.end(),
                      v.rule_id) == outcome.failed_rules.end())
          outcome.failed_rules.push_back(v.rule_id);
      write_out("OUTCAR",
                outcar_preamble(initial.comment) + " deck validation failed\n" +
                    report.to_string());
      return outcome;
    }

    const double spring =
        std::abs(deck.incar.get_real("SPRING").value_or(-5.0));
    const bool climb = deck.incar.get_bool("LCLIMB").value_or(false);
    const auto result = run_neb(initial, final_s, std::move(images),
                                config.potential, deck.crit, spring, climb);

    for (int i = 0; i <= n + 1; ++i) {
      const auto& member = result.band[static_cast<std::size_t>(i)];
      const double energy = result.energies[static_cast<std::size_t>(i)];
      const std::string sub = subdir_name(i);
      std::ostringstream img_out;
      img_out << outcar_preamble(member.comment);
      img_out << "--------------------------------------- Iteration 1\n";
      img_out << "  free  energy   TOTEN  =  " << fmt("%.8f", energy)
              << " eV\n";
      if (result.converged) img_out << kSentinel;
      write_out(sub + "/OUTCAR", img_out.str());
      if (i > 0 && i <= n) {
        vasp::CrystalStructure contcar = member;
        contcar.mode = vasp::CoordinateMode::Direct;
        contcar.positions =
            vasp::wrap_fractional(vasp::fractional_positions(member));
        write_out(sub + "/CONTCAR", vasp::write_poscar(contcar));
      }
    }

    std::ostringstream top;
    top << outcar_preamble(initial.comment);
    top << " NEB: " << n << " images, spring = " << fmt("%.4f", spring)
        << " eV/A^2, climbing = " << (climb ? "on" : "off") << '\n';
    for (std::size_t i = 0; i < result.energies.size(); ++i)
      top << " NEB: image " << i
          << " energy = " << fmt("%.8f", result.energies[i]) << " eV\n";
    top << " NEB: barrier = " << fmt("%.8f", result.barrier_ev) << " eV\n";
    top << " NEB: delta_e = " << fmt("%.8f", result.delta_e_ev) << " eV\n";
    top << " NEB: max force = " << fmt("%.6f", result.max_force) << " eV/A\n";
    if (result.converged) top << kSentinel;
    write_out("OUTCAR", top.str());

    outcome.status =
        result.converged ? SimStatus::ConvergedOk : SimStatus::NotConverged;
    outcome.energy_trace = result.energies;
    outcome.barrier_ev = result.barrier_ev;
    outcome.delta_e_ev = result.delta_e_ev;
    int saddle = 0;
    for (std::size_t i = 0; i < result.energies.size(); ++i)
      if (result.energies[i] > result.energies[static_cast<std::size_t>(saddle)])
        saddle = static_cast<int>(i);
    outcome.final_structure = result.band[static_cast<std::size_t>(saddle)];
    update_state(dir, {{"mode", "neb"},
                       {"converged", result.converged},
                       {"images", n}});
    return outcome;
  }

  const auto poscar = vasp::parse_poscar(require_file(dir, "POSCAR"));
  check_potcar(dir, poscar, report);

  if (!report.ok()) {
    outcome.mode = deck.bs_mode ? "band_structure"
                   : deck.crit.max_ionic_steps > 0 ? "relaxation"
                                                   : "static";
    outcome.status = SimStatus::ValidationFailed;
    for (const auto& v : report.violations)
      if (std::find(outcome.failed_rules.begin(), outcome.failed_rules.end(),
                    v.rule_id) == outcome.failed_rules.end())
        outcome.failed_rules.push_back(v.rule_id);
    write_out("OUTCAR",
              outcar_preamble(poscar.comment) + " deck validation failed\n" +
                  report.to_string());
    return outcome;
  }

  if (deck.bs_mode) {
    outcome.mode = "band_structure";
    const auto comment_toks = detail::split_ws(poscar.comment);
    if (comment_toks.empty())
      throw Error(ErrorKind::ConfigError,
                  "POSCAR comment does not identify the material");
    const std::string identifier(comment_toks[0]);
    const BsRecord* record = nullptr;
    for (const auto& rec : config.bs_fixtures)
      if (rec.identifier == identifier) record = &rec;
    if (!record)
      throw Error(ErrorKind::ConfigError,
                  "no band-structure reference for material '" + identifier +
                      "'");

    const bool hybrid = deck.incar.get_bool("LHFCALC").value_or(false) &&
                        deck.incar.has("AEXX");
    const double gap = hybrid ? record->gap_ev : 0.6 * record->gap_ev;
    if (!hybrid)
      outcome.notes.push_back(
          "hybrid tags missing or incomplete; emitted gap scaled by 0.6");

    const double vb_top = -1.0;
    const double fermi = vb_top + 0.5 * gap;
    const int n_k = std::max(record->vbm_k, record->cbm_k) + 2;
    const double toten = -4.0 * vasp::atom_count(poscar);

    std::ostringstream out;
    out << outcar_preamble(poscar.comment);
    out << "--------------------------------------- Iteration 1\n";
    out << "  free  energy   TOTEN  =  " << fmt("%.8f", toten) << " eV\n";
    out << " E-fermi :  " << fmt("%.6f", fermi) << '\n';
    out << " band eigenvalues\n";
    for (int k = 1; k <= n_k; ++k) {
      out << " k-point " << k << '\n';
      const double ev = vb_top - 0.15 * std::abs(k - record->vbm_k);
      const double ec = vb_top + gap + 0.15 * std::abs(k - record->cbm_k);
      out << "  1 " << fmt("%.6f", ev) << " 2.000000\n";
      out << "  2 " << fmt("%.6f", ec) << " 0.000000\n";
    }
    out << kSentinel;
    write_out("OUTCAR", out.str());

    outcome.status = SimStatus::ConvergedOk;
    outcome.energy_trace = {toten};
    outcome.final_structure = poscar;
    update_state(dir, {{"mode", "band_structure"},
                       {"converged", true},
                       {"hybrid", hybrid}});
    return outcome;
  }

  outcome.mode = deck.crit.max_ionic_steps > 0 ? "relaxation" : "static";
  if (isif && *isif == 3)
    outcome.notes.push_back(
        "ISIF=3 requested cell relaxation; the toy backend moves ions only "
        "and keeps the cell fixed");

  const auto result =
      relax_structure(poscar, config.potential, deck.crit, deck.flavor);
  write_out("OUTCAR", relaxation_outcar(poscar.comment, result.trace,
                                        result.max_force, result.converged));
  vasp::CrystalStructure contcar = result.relaxed;
  contcar.mode = vasp::CoordinateMode::Direct;
  contcar.positions =
      vasp::wrap_fractional(vasp::fractional_positions(result.relaxed));
  write_out("CONTCAR", vasp::write_poscar(contcar));

  outcome.status =
      result.converged ? SimStatus::ConvergedOk : SimStatus::NotConverged;
  outcome.energy_trace = result.trace;
  outcome.final_structure = result.relaxed;
  std::map<std::string, nlohmann::json> state = {
      {"mode", outcome.mode},
      {"converged", result.converged},
      {"ions_only", true}};
  if (isif) state["isif"] = static_cast<int>(*isif);
  update_state(dir, state);
  return outcome;
}

}  // namespace

SimOutcome run_simulation(const fs::path& dir, const BackendConfig& config) {
  try {
    return run_inner(dir, config);
  } catch (const std::exception& e) {
    SimOutcome outcome;
    outcome.status = SimStatus::Crashed;
    outcome.reason = e.what();
    if (fs::is_directory(dir)) {
      try {
        detail::write_file(dir / "OUTCAR",
                           " vaspflow toy backend\n RUN ERROR: " +
                               outcome.reason + "\n");
        outcome.files_written.push_back("OUTCAR");
      } catch (const std::exception&) {
        // the error outcome already carries the reason
      }
    }
    return outcome;
  }
}

NebProfile read_neb_profile(const fs::path& dir) {
  NebProfile profile;
  for (int i = 0;; ++i) {
    const fs::path sub = dir / subdir_name(i);
    if (!fs::is_directory(sub)) {
      if (i == 0)
        throw Error(ErrorKind::IoError,
                    "no NEB image directories under " + dir.string());
      break;
    }
    const auto summary = vasp::extract_outcar_summary(
        detail::read_file(sub / "OUTCAR"), vasp::default_outcar_patterns());
    profile.energies.push_back(summary.final_energy_ev);
  }
  if (profile.energies.size() < 3)
    throw Error(ErrorKind::IoError, "NEB profile needs at least 3 images");
  double peak = profile.energies.front();
  for (const double e : profile.energies) peak = std::max(peak, e);
  profile.barrier_ev = peak - profile.energies.front();
  profile.delta_e_ev = profile.energies.back() - profile.energies.front();
  return profile;
}

}  // namespace vaspflow::sim
