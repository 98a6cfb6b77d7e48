#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vaspflow/vasp/incar.hpp"

namespace vaspflow::sim {

/// Facts carried between pipeline steps that single-deck validation cannot
/// see on its own (e.g. which ISIF the endpoint relaxations used before a
/// NEB step). Keys are plain strings so producers stay decoupled.
struct CrossStepContext {
  std::map<std::string, std::string> facts;

  std::optional<std::string> get(const std::string& key) const {
    const auto it = facts.find(key);
    if (it == facts.end()) return std::nullopt;
    return it->second;
  }
};

struct TagSpec {
  std::string tag;
  vasp::TagKind kind = vasp::TagKind::Text;
  std::optional<double> min_value;
  std::optional<double> max_value;
  std::vector<std::string> enum_values;  // Text tags; case-insensitive
  std::string description;
};

struct Violation {
  std::string rule_id;  // unknown_tag, wrong_value_kind, out_of_range, or a rule id
  std::string tag;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has_rule(std::string_view rule_id) const;
  std::string to_string() const;
};

struct InterdependenceRule {
  std::string id;
  std::string description;
  std::vector<std::string> referenced_tags;
  // total over all valid documents; a nullopt means the rule holds
  std::function<std::optional<Violation>(const vasp::IncarDocument&,
                                         const CrossStepContext&)>
      predicate;
};

class TagRegistry {
 public:
  /// The built-in table: ~50 tags covering the four workflows plus the
  /// interdependence rules for the known failure classes.
  static TagRegistry builtin();

  void add_tag(TagSpec spec);
  void add_rule(InterdependenceRule rule);
  /// Extends the tag table from a JSON array of tag specs (data-driven
  /// growth); see share/registry_extra.json for the schema.
  void extend_from_json(const std::string& json_text);

  const TagSpec* find(std::string_view tag) const;
  const std::vector<InterdependenceRule>& rules() const { return rules_; }
  std::size_t tag_count() const { return tags_.size(); }

 private:
  std::map<std::string, TagSpec> tags_;
  std::vector<InterdependenceRule> rules_;
};

/// Reports every violation: unknown tags, wrong value kinds, out-of-range
/// values, then failed interdependence rules, in that order. Validation
/// failure is data; this never throws on any parsed document.
ValidationReport validate_deck(const vasp::IncarDocument& incar,
                               const TagRegistry& registry,
                               const CrossStepContext& cross_step = {});

}  // namespace vaspflow::sim
