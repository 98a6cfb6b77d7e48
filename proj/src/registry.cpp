#include "vaspflow/sim/registry.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::sim {

namespace {

using vasp::IncarDocument;
using vasp::TagKind;
using vasp::TagValue;

bool kind_accepts(TagKind expected, TagKind actual) {
  if (expected == actual) return true;
  switch (expected) {
    case TagKind::Real:
      return actual == TagKind::Int;
    case TagKind::IntList:
      return actual == TagKind::Int;
    case TagKind::RealList:
      return actual == TagKind::Int || actual == TagKind::Real ||
             actual == TagKind::IntList;
    case TagKind::Text:
      // some text tags accept logical spellings (LREAL = .FALSE.)
      return actual == TagKind::Bool;
    default:
      return false;
  }
}

std::vector<double> numeric_values(const TagValue& v) {
  switch (v.kind()) {
    case TagKind::Int:
      return {static_cast<double>(v.as_int())};
    case TagKind::Real:
      return {v.as_real()};
    case TagKind::IntList:
    case TagKind::RealList:
      return v.as_real_list();
    default:
      return {};
  }
}

std::optional<long long> int_tag(const IncarDocument& d, std::string_view tag) {
  return d.get_int(tag);
}

}  // namespace

bool ValidationReport::has_rule(std::string_view rule_id) const {
  for (const auto& v : violations)
    if (v.rule_id == rule_id) return true;
  return false;
}

std::string ValidationReport::to_string() const {
  if (violations.empty()) return "deck valid";
  std::ostringstream out;
  out << "deck invalid (" << violations.size() << " violation"
      << (violations.size() == 1 ? "" : "s") << "):\n";
  for (const auto& v : violations)
    out << "  [" << v.rule_id << "] " << v.tag << ": " << v.message << '\n';
  return out.str();
}

void TagRegistry::add_tag(TagSpec spec) {
  const std::string key = detail::to_upper(spec.tag);
  spec.tag = key;
  tags_[key] = std::move(spec);
}

void TagRegistry::add_rule(InterdependenceRule rule) {
  for (const auto& tag : rule.referenced_tags)
    if (!find(tag))
      throw Error(ErrorKind::ConfigError,
                  "rule " + rule.id + " references unknown tag " + tag);
  rules_.push_back(std::move(rule));
}

const TagSpec* TagRegistry::find(std::string_view tag) const {
  const auto it = tags_.find(detail::to_upper(tag));
  if (it == tags_.end()) return nullptr;
  return &it->second;
}

void TagRegistry::extend_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError,
                std::string("registry extension is not valid JSON: ") + e.what());
  }
  if (!doc.is_array())
    throw Error(ErrorKind::ConfigError, "registry extension must be an array");
  for (const auto& item : doc) {
    TagSpec spec;
    try {
      spec.tag = item.at("tag").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "bool") spec.kind = TagKind::Bool;
      else if (kind == "int") spec.kind = TagKind::Int;
      else if (kind == "real") spec.kind = TagKind::Real;
      else if (kind == "int_list") spec.kind = TagKind::IntList;
      else if (kind == "real_list") spec.kind = TagKind::RealList;
      else if (kind == "text") spec.kind = TagKind::Text;
      else
        throw Error(ErrorKind::ConfigError, "unknown tag kind " + kind);
      if (item.contains("min")) spec.min_value = item["min"].get<double>();
      if (item.contains("max")) spec.max_value = item["max"].get<double>();
      if (item.contains("enum"))
        spec.enum_values = item["enum"].get<std::vector<std::string>>();
      if (item.contains("description"))
        spec.description = item["description"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError,
                  std::string("bad registry extension entry: ") + e.what());
    }
    add_tag(std::move(spec));
  }
}

TagRegistry TagRegistry::builtin() {
  TagRegistry reg;
  auto tag_int = [&](const char* t, double lo, double hi, const char* d) {
    reg.add_tag({t, TagKind::Int, lo, hi, {}, d});
  };
  auto tag_real = [&](const char* t, double lo, double hi, const char* d) {
    reg.add_tag({t, TagKind::Real, lo, hi, {}, d});
  };
  auto tag_bool = [&](const char* t, const char* d) {
    reg.add_tag({t, TagKind::Bool, {}, {}, {}, d});
  };
  auto tag_text = [&](const char* t, std::vector<std::string> e, const char* d) {
    reg.add_tag({t, TagKind::Text, {}, {}, std::move(e), d});
  };

  tag_real("ENCUT", 50, 2000, "plane-wave cutoff energy (eV)");
  tag_real("EDIFF", 1e-12, 1, "electronic convergence criterion (eV)");
  tag_real("EDIFFG", -10, 10, "ionic convergence criterion (eV or -eV/A)");
  tag_int("IBRION", -1, 44, "ionic update algorithm");
  tag_real("POTIM", 0.001, 10, "ionic step size / timestep scaling");
  tag_int("NSW", 0, 10000, "maximum number of ionic steps");
  tag_int("ISIF", 0, 7, "degrees of freedom: ions, cell shape, cell volume");
  tag_int("ISMEAR", -5, 2, "smearing scheme");
  tag_real("SIGMA", 0.001, 2, "smearing width (eV)");
  tag_bool("LHFCALC", "enable hybrid functional exchange");
  tag_real("AEXX", 0, 1, "fraction of exact exchange");
  tag_real("HFSCREEN", 0, 1, "range-separation parameter (1/A)");
  tag_int("ICHARG", 0, 11, "charge density initialization");
  tag_int("IMAGES", 1, 64, "number of NEB images");
  tag_real("SPRING", -50, 50, "NEB spring constant (eV/A^2, negative = nudged)");
  tag_bool("LCLIMB", "climbing image NEB");
  tag_int("ISPIN", 1, 2, "spin polarization");
  tag_text("PREC", {"Low", "Medium", "Normal", "High", "Accurate", "Single"},
           "precision mode");
  tag_text("ALGO", {"Normal", "Fast", "VeryFast", "All", "Damped", "Exact"},
           "electronic minimization algorithm");
  tag_text("LREAL", {"Auto", "On", "Off", ".TRUE.", ".FALSE."},
           "projection operators in real space");
  tag_int("NELM", 1, 500, "maximum electronic steps");
  tag_int("NELMIN", 1, 100, "minimum electronic steps");
  tag_real("AMIX", 0, 1, "linear mixing parameter");
  tag_real("BMIX", 0, 10, "Kerker mixing cutoff");
  tag_real("AMIN", 0, 1, "minimal mixing parameter");
  tag_bool("LWAVE", "write WAVECAR");
  tag_bool("LCHARG", "write CHGCAR");
  tag_int("LORBIT", 0, 14, "projected DOS detail");
  tag_int("NEDOS", 100, 10000, "DOS grid points");
  tag_real("EMIN", -50, 50, "DOS window lower bound (eV)");
  tag_real("EMAX", -50, 50, "DOS window upper bound (eV)");
  tag_int("ISYM", -1, 3, "symmetry handling");
  tag_real("SYMPREC", 0, 1, "symmetry detection tolerance");
  tag_real("KSPACING", 0, 10, "k-point spacing when KPOINTS absent");
  tag_bool("KGAMMA", "gamma-centered KSPACING grid");
  tag_text("GGA", {"PE", "PS", "RP", "91", "AM", "BF"}, "exchange functional");
  tag_int("IVDW", 0, 21, "van der Waals correction scheme");
  tag_bool("LDIPOL", "dipole corrections");
  tag_int("IDIPOL", 1, 4, "dipole correction direction");
  tag_int("NCORE", 1, 256, "cores per orbital");
  tag_int("NPAR", 1, 256, "orbital parallelization");
  tag_int("KPAR", 1, 64, "k-point parallelization");
  tag_bool("LASPH", "aspherical gradient corrections");
  tag_int("LMAXMIX", 2, 6, "density mixer angular momentum cap");
  tag_int("NBANDS", 1, 10000, "number of bands");
  reg.add_tag({"SYSTEM", TagKind::Text, {}, {}, {}, "calculation title"});
  reg.add_tag({"MAGMOM", TagKind::RealList, {}, {}, {}, "initial magnetic moments"});
  tag_real("SMASS", -3, 10, "MD thermostat parameter");
  tag_real("TEBEG", 0, 10000, "MD initial temperature (K)");
  tag_real("TEEND", 0, 10000, "MD final temperature (K)");
  tag_real("ENAUG", 100, 5000, "augmentation grid cutoff (eV)");
  tag_bool("ADDGRID", "extra support grid");

  reg.add_rule(
      {"ibrion_potim",
       "POTIM is required by the ionic-update algorithms IBRION 0..3 and "
       "meaningless for IBRION=-1",
       {"IBRION", "POTIM"},
       [](const IncarDocument& d, const CrossStepContext&)
           -> std::optional<Violation> {
         const auto ibrion = int_tag(d, "IBRION");
         if (!ibrion) return std::nullopt;
         if (*ibrion >= 0 && *ibrion <= 3 && !d.has("POTIM"))
           return Violation{"ibrion_potim", "POTIM",
                            "IBRION=" + std::to_string(*ibrion) +
                                " selects an ionic-update algorithm whose step "
                                "meaning depends on POTIM; set POTIM"};
         if (*ibrion == -1 && d.has("POTIM"))
           return Violation{"ibrion_potim", "POTIM",
                            "POTIM has no meaning when IBRION=-1 disables "
                            "ionic updates; remove it"};
         return std::nullopt;
       }});

  reg.add_rule(
      {"neb_cell_consistency",
       "NEB interpolation requires endpoint cells to be identical; ISIF=3 "
       "relaxations change the cell",
       {"IMAGES", "ISIF"},
       [](const IncarDocument& d, const CrossStepContext& ctx)
           -> std::optional<Violation> {
         if (!d.has("IMAGES")) return std::nullopt;
         if (const auto isif = int_tag(d, "ISIF"); isif && *isif == 3)
           return Violation{"neb_cell_consistency", "ISIF",
                            "ISIF=3 lets the cell change during the NEB run; "
                            "images would no longer share one cell"};
         if (const auto endpoint_isif = ctx.get("endpoint_isif");
             endpoint_isif && *endpoint_isif == "3")
           return Violation{
               "neb_cell_consistency", "ISIF",
               "endpoint relaxations used ISIF=3, so the two endpoint cells "
               "are not guaranteed equal; NEB interpolation is invalid"};
         return std::nullopt;
       }});

  reg.add_rule(
      {"hse_requires_lhfcalc",
       "AEXX/HFSCREEN parameterize hybrid exchange and require LHFCALC=.TRUE.",
       {"LHFCALC", "AEXX", "HFSCREEN"},
       [](const IncarDocument& d, const CrossStepContext&)
           -> std::optional<Violation> {
         if (!d.has("AEXX") && !d.has("HFSCREEN")) return std::nullopt;
         if (d.get_bool("LHFCALC").value_or(false)) return std::nullopt;
         return Violation{"hse_requires_lhfcalc",
                          d.has("AEXX") ? "AEXX" : "HFSCREEN",
                          "hybrid exchange parameters are set but LHFCALC is "
                          "not enabled"};
       }});

  return reg;
}

ValidationReport validate_deck(const IncarDocument& incar,
                               const TagRegistry& registry,
                               const CrossStepContext& cross_step) {
  ValidationReport report;
  for (const auto& entry : incar.entries) {
    const TagSpec* spec = registry.find(entry.tag);
    if (!spec) {
      report.violations.push_back(
          {"unknown_tag", entry.tag,
           "tag is not in the registry; check the spelling"});
      continue;
    }
    if (!kind_accepts(spec->kind, entry.value.kind())) {
      report.violations.push_back(
          {"wrong_value_kind", entry.tag,
           "value '" + entry.value.serialize() + "' has the wrong shape"});
      continue;
    }
    if (spec->min_value || spec->max_value) {
      for (const double v : numeric_values(entry.value)) {
        if ((spec->min_value && v < *spec->min_value) ||
            (spec->max_value && v > *spec->max_value)) {
          report.violations.push_back(
              {"out_of_range", entry.tag,
               "value " + entry.value.serialize() + " outside [" +
                   std::to_string(spec->min_value.value_or(-1e300)) + ", " +
                   std::to_string(spec->max_value.value_or(1e300)) + "]"});
          break;
        }
      }
    }
    if (!spec->enum_values.empty()) {
      const std::string got = entry.value.serialize();
      bool found = false;
      for (const auto& allowed : spec->enum_values)
        if (detail::iequals(allowed, got)) found = true;
      if (!found)
        report.violations.push_back(
            {"out_of_range", entry.tag,
             "value '" + got + "' is not one of the allowed settings"});
    }
  }
  for (const auto& rule : registry.rules())
    if (auto violation = rule.predicate(incar, cross_step))
      report.violations.push_back(std::move(*violation));
  return report;
}

}  // namespace vaspflow::sim
