#include "vaspflow/vasp/outcar.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

namespace {

using detail::split_lines;
using detail::split_ws;
using detail::to_double;
using detail::to_int;

constexpr std::size_t kMaxLineForRegex = 65536;

}  // namespace

const std::vector<ExtractionPattern>& default_outcar_patterns() {
  static const std::vector<ExtractionPattern> patterns = {
      {"toten", R"(free  energy   TOTEN\s*=\s*([-+]?[0-9][0-9.eE+-]*)\s*eV)",
       CaptureType::Real},
      {"converged",
       R"(reached required accuracy - stopping structural energy minimisation)",
       CaptureType::Flag},
      {"fermi", R"(E-fermi\s*:\s*([-+]?[0-9][0-9.eE+-]*))", CaptureType::Real},
      {"max_force", R"(max atom force\s*=\s*([-+]?[0-9][0-9.eE+-]*))",
       CaptureType::Real},
  };
  return patterns;
}

OutcarSummary extract_outcar_summary(
    std::string_view text, const std::vector<ExtractionPattern>& patterns) {
  struct Compiled {
    const ExtractionPattern* spec;
    std::regex re;
    int hits = 0;
    std::string last_text;
  };
  std::vector<Compiled> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      compiled.push_back({&p, std::regex(p.pattern), 0, {}});
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::ConfigError,
                  "pattern '" + p.name + "' does not compile: " + e.what());
    }
  }
  auto named = [&](std::string_view name) -> Compiled* {
    for (auto& c : compiled)
      if (c.spec->name == name) return &c;
    return nullptr;
  };
  if (!named("toten") || !named("converged"))
    throw Error(ErrorKind::ConfigError,
                "pattern set must include 'toten' and 'converged'");

  std::vector<EigenvalueRow> table;
  int current_kpoint = 0;

  for (const auto line : split_lines(text)) {
    if (line.size() <= kMaxLineForRegex) {
      std::cmatch m;
      for (auto& c : compiled) {
        if (std::regex_search(line.data(), line.data() + line.size(), m, c.re)) {
          ++c.hits;
          if (c.spec->capture_type != CaptureType::Flag && m.size() > 1)
            c.last_text = m[1].str();
        }
      }
    }
    // eigenvalue block: "k-point <i>" header then "  <band> <energy> <occ>"
    const auto toks = split_ws(line);
    if (toks.size() >= 2 && toks[0] == "k-point") {
      const auto k = to_int(toks[1]);
      current_kpoint = (k && *k > 0 && *k < 100000) ? static_cast<int>(*k) : 0;
      continue;
    }
    if (current_kpoint > 0 && toks.size() == 3) {
      const auto band = to_int(toks[0]);
      const auto energy = to_double(toks[1]);
      const auto occ = to_double(toks[2]);
      if (band && *band > 0 && *band < 100000 && energy && occ) {
        if (table.size() < 1000000)
          table.push_back({current_kpoint, static_cast<int>(*band), *energy, *occ});
        continue;
      }
    }
    if (current_kpoint > 0 && !toks.empty()) current_kpoint = 0;
  }

  OutcarSummary summary;
  const auto* toten = named("toten");
  if (toten->hits == 0)
    throw Error(ErrorKind::MissingRequiredQuantity, "no TOTEN line found");
  const auto energy = to_double(toten->last_text);
  if (!energy)
    throw Error(ErrorKind::MissingRequiredQuantity,
                "TOTEN value '" + toten->last_text + "' is not a number");
  summary.final_energy_ev = *energy;
  summary.n_ionic_steps = toten->hits > 0 ? toten->hits - 1 : 0;
  summary.converged = named("converged")->hits > 0;
  if (const auto* c = named("fermi"); c && c->hits > 0)
    if (const auto v = to_double(c->last_text)) summary.fermi_energy_ev = *v;
  if (const auto* c = named("max_force"); c && c->hits > 0)
    if (const auto v = to_double(c->last_text)) summary.max_force_ev_per_a = *v;
  if (!table.empty()) summary.eigenvalue_table = std::move(table);
  return summary;
}

std::map<std::string, std::string> apply_extraction_patterns(
    std::string_view text, const std::vector<ExtractionPattern>& patterns) {
  struct Compiled {
    const ExtractionPattern* spec;
    std::regex re;
    bool hit = false;
    std::string last_text;
  };
  std::vector<Compiled> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      compiled.push_back({&p, std::regex(p.pattern), false, {}});
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::ConfigError,
                  "pattern '" + p.name + "' does not compile: " + e.what());
    }
  }

  for (const auto line : split_lines(text)) {
    if (line.size() > kMaxLineForRegex) continue;
    std::cmatch m;
    for (auto& c : compiled) {
      if (!std::regex_search(line.data(), line.data() + line.size(), m, c.re))
        continue;
      const std::string captured = m.size() > 1 ? m[1].str() : std::string();
      switch (c.spec->capture_type) {
        case CaptureType::Flag:
          c.hit = true;
          break;
        case CaptureType::Real:
          if (to_double(captured)) {
            c.hit = true;
            c.last_text = captured;
          }
          break;
        case CaptureType::Int:
          if (to_int(captured)) {
            c.hit = true;
            c.last_text = captured;
          }
          break;
        case CaptureType::Text:
          c.hit = true;
          c.last_text = captured;
          break;
      }
    }
  }

  std::map<std::string, std::string> result;
  for (const auto& c : compiled) {
    if (c.spec->capture_type == CaptureType::Flag)
      result[c.spec->name] = c.hit ? "true" : "false";
    else if (c.hit)
      result[c.spec->name] = c.last_text;
  }
  return result;
}

BandGap band_gap_from_eigenvalues(const OutcarSummary& summary) {
  if (!summary.eigenvalue_table || summary.eigenvalue_table->empty())
    throw Error(ErrorKind::NoEigenvalues, "summary has no eigenvalue table");
  if (!summary.fermi_energy_ev)
    throw Error(ErrorKind::NoEigenvalues, "summary has no Fermi energy");
  const auto& rows = *summary.eigenvalue_table;
  const double fermi = *summary.fermi_energy_ev;

  // metal check: any band with energies on both sides of the Fermi level
  struct Range { double lo = 1e300; double hi = -1e300; };
  std::map<int, Range> band_range;
  for (const auto& r : rows) {
    auto& range = band_range[r.band_index];
    range.lo = std::min(range.lo, r.energy_ev);
    range.hi = std::max(range.hi, r.energy_ev);
  }
  for (const auto& [band, range] : band_range)
    if (range.lo < fermi && range.hi > fermi) return {0.0, false, 0, 0};

  bool have_occ = false, have_unocc = false;
  double vbm = -1e300, cbm = 1e300;
  int vbm_k = 0, cbm_k = 0;
  for (const auto& r : rows) {
    if (r.occupancy >= 0.5) {
      have_occ = true;
      if (r.energy_ev > vbm) { vbm = r.energy_ev; vbm_k = r.kpoint_index; }
    } else {
      have_unocc = true;
      if (r.energy_ev < cbm) { cbm = r.energy_ev; cbm_k = r.kpoint_index; }
    }
  }
  if (!have_occ || !have_unocc)
    throw Error(ErrorKind::NoEigenvalues,
                "table lacks occupied or unoccupied states");
  BandGap out;
  out.gap_ev = std::max(0.0, cbm - vbm);
  out.vbm_kpoint = vbm_k;
  out.cbm_kpoint = cbm_k;
  out.direct = (vbm_k == cbm_k);
  return out;
}

}  // namespace vaspflow::vasp
