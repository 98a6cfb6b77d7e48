#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vaspflow::vasp {

enum class TagKind { Bool, Int, Real, IntList, RealList, Text };

/// One INCAR value, typed by lexical shape at parse time. Serialization is
/// canonical per kind and survives a parse round-trip with the kind intact
/// (a Real with integral value is written with a trailing ".0").
class TagValue {
 public:
  static TagValue boolean(bool v) { return TagValue(v); }
  static TagValue integer(long long v) { return TagValue(v); }
  static TagValue real(double v) { return TagValue(v); }
  static TagValue int_list(std::vector<long long> v) { return TagValue(std::move(v)); }
  static TagValue real_list(std::vector<double> v) { return TagValue(std::move(v)); }
  static TagValue text(std::string v) { return TagValue(std::move(v)); }

  TagKind kind() const { return static_cast<TagKind>(value_.index()); }

  bool as_bool() const { return std::get<bool>(value_); }
  long long as_int() const { return std::get<long long>(value_); }
  double as_real() const;  // widens Int to Real
  const std::vector<long long>& as_int_list() const { return std::get<std::vector<long long>>(value_); }
  std::vector<double> as_real_list() const;  // widens IntList
  const std::string& as_text() const { return std::get<std::string>(value_); }

  std::string serialize() const;

  bool operator==(const TagValue& other) const { return value_ == other.value_; }

 private:
  template <typename T>
  explicit TagValue(T v) : value_(std::move(v)) {}

  std::variant<bool, long long, double, std::vector<long long>,
               std::vector<double>, std::string>
      value_;
};

struct IncarEntry {
  std::string tag;
  TagValue value;
  int source_line = 0;
};

struct IncarDocument {
  std::vector<IncarEntry> entries;

  const TagValue* find(std::string_view tag) const;
  bool has(std::string_view tag) const { return find(tag) != nullptr; }
  std::optional<long long> get_int(std::string_view tag) const;
  std::optional<double> get_real(std::string_view tag) const;
  std::optional<bool> get_bool(std::string_view tag) const;
  /// Appends or replaces; replacement keeps position, new tags go last.
  void set(std::string_view tag, TagValue value);
};

/// `TAG = VALUE` per line, '#' and '!' start comments, blank lines ignored.
/// Duplicate tags and non-blank lines without '=' are errors.
IncarDocument parse_incar(std::string_view text);

std::string write_incar(const IncarDocument& doc);

}  // namespace vaspflow::vasp
