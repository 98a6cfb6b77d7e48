#include "vaspflow/vasp/incar.hpp"

#include <cctype>
#include <sstream>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

namespace {

using detail::iequals;
using detail::split_ws;
using detail::to_double;
using detail::to_int;
using detail::trim;

std::string serialize_real(double v) {
  std::string t = detail::format_shortest(v);
  if (t.find('.') == std::string::npos && t.find('e') == std::string::npos &&
      t.find('E') == std::string::npos)
    t += ".0";
  return t;
}

bool valid_tag(std::string_view tag) {
  if (tag.empty() || !std::isalpha(static_cast<unsigned char>(tag.front())))
    return false;
  for (char c : tag)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

TagValue type_value(std::string_view raw) {
  const auto toks = split_ws(raw);
  if (toks.size() == 1) {
    const auto tok = toks[0];
    if (iequals(tok, ".TRUE.")) return TagValue::boolean(true);
    if (iequals(tok, ".FALSE.")) return TagValue::boolean(false);
    if (const auto i = to_int(tok)) return TagValue::integer(*i);
    if (const auto r = to_double(tok)) return TagValue::real(*r);
    return TagValue::text(std::string(trim(raw)));
  }
  bool all_int = true, all_num = true;
  for (const auto tok : toks) {
    if (!to_int(tok)) all_int = false;
    if (!to_double(tok)) { all_num = false; break; }
  }
  if (all_int) {
    std::vector<long long> v;
    for (const auto tok : toks) v.push_back(*to_int(tok));
    return TagValue::int_list(std::move(v));
  }
  if (all_num) {
    std::vector<double> v;
    for (const auto tok : toks) v.push_back(*to_double(tok));
    return TagValue::real_list(std::move(v));
  }
  return TagValue::text(std::string(trim(raw)));
}

}  // namespace

double TagValue::as_real() const {
  if (kind() == TagKind::Int) return static_cast<double>(as_int());
  return std::get<double>(value_);
}

std::vector<double> TagValue::as_real_list() const {
  if (kind() == TagKind::IntList) {
    const auto& il = as_int_list();
    return std::vector<double>(il.begin(), il.end());
  }
  return std::get<std::vector<double>>(value_);
}

std::string TagValue::serialize() const {
  switch (kind()) {
    case TagKind::Bool:
      return as_bool() ? ".TRUE." : ".FALSE.";
    case TagKind::Int:
      return std::to_string(as_int());
    case TagKind::Real:
      return serialize_real(std::get<double>(value_));
    case TagKind::IntList: {
      std::string out;
      for (const auto v : as_int_list()) {
        if (!out.empty()) out += ' ';
        out += std::to_string(v);
      }
      return out;
    }
    case TagKind::RealList: {
      std::string out;
      for (const auto v : std::get<std::vector<double>>(value_)) {
        if (!out.empty()) out += ' ';
        out += serialize_real(v);
      }
      return out;
    }
    case TagKind::Text:
      return as_text();
  }
  return {};
}

const TagValue* IncarDocument::find(std::string_view tag) const {
  for (const auto& e : entries)
    if (iequals(e.tag, tag)) return &e.value;
  return nullptr;
}

std::optional<long long> IncarDocument::get_int(std::string_view tag) const {
  const auto* v = find(tag);
  if (!v || v->kind() != TagKind::Int) return std::nullopt;
  return v->as_int();
}

std::optional<double> IncarDocument::get_real(std::string_view tag) const {
  const auto* v = find(tag);
  if (!v || (v->kind() != TagKind::Real && v->kind() != TagKind::Int))
    return std::nullopt;
  return v->as_real();
}

std::optional<bool> IncarDocument::get_bool(std::string_view tag) const {
  const auto* v = find(tag);
  if (!v || v->kind() != TagKind::Bool) return std::nullopt;
  return v->as_bool();
}

void IncarDocument::set(std::string_view tag, TagValue value) {
  for (auto& e : entries) {
    if (iequals(e.tag, tag)) {
      e.value = std::move(value);
      return;
    }
  }
  entries.push_back({detail::to_upper(tag), std::move(value), 0});
}

IncarDocument parse_incar(std::string_view text) {
  IncarDocument doc;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    const auto cut = line.find_first_of("#!");
    if (cut != std::string_view::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::MalformedLine,
                  "line " + std::to_string(ln + 1) + " has no '='");
    const auto tag_raw = trim(line.substr(0, eq));
    if (!valid_tag(tag_raw))
      throw Error(ErrorKind::MalformedLine,
                  "invalid tag name '" + std::string(tag_raw) + "' on line " +
                      std::to_string(ln + 1));
    const std::string tag = detail::to_upper(tag_raw);
    if (doc.has(tag))
      throw Error(ErrorKind::DuplicateTag, "tag " + tag + " appears twice");
    const auto value_raw = trim(line.substr(eq + 1));
    if (value_raw.empty())
      throw Error(ErrorKind::MalformedLine,
                  "tag " + tag + " has an empty value");
    doc.entries.push_back(
        {tag, type_value(value_raw), static_cast<int>(ln + 1)});
  }
  return doc;
}

std::string write_incar(const IncarDocument& doc) {
  std::ostringstream out;
  for (const auto& e : doc.entries)
    out << e.tag << " = " << e.value.serialize() << '\n';
  return out.str();
}

}  // namespace vaspflow::vasp
