#include "vaspflow/llm/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "vaspflow/detail/io.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::llm {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultFencePattern =
    "```(?:[A-Za-z0-9_+-]*\\n)?([\\s\\S]*?)\\n?```";

bool slot_start_char(char c) {
  return c == '_' || std::isalpha(static_cast<unsigned char>(c));
}

bool slot_char(char c) {
  return c == '_' || c == '.' || std::isalnum(static_cast<unsigned char>(c));
}

/// Finds the next well-formed slot at or after `from`. Returns npos when
/// there is none; otherwise *out_end is one past the closing brace.
std::size_t find_slot(const std::string& body, std::size_t from,
                      std::size_t* out_end) {
  for (std::size_t i = body.find('{', from); i != std::string::npos;
       i = body.find('{', i + 1)) {
    std::size_t j = i + 1;
    if (j >= body.size() || !slot_start_char(body[j])) continue;
    while (j < body.size() && slot_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}') {
      *out_end = j + 1;
      return i;
    }
  }
  return std::string::npos;
}

}  // namespace

const char* to_string(LayerName name) {
  switch (name) {
    case LayerName::DomainBackground: return "domain_background";
    case LayerName::TaskInstructions: return "task_instructions";
    case LayerName::CurrentState: return "current_state";
    case LayerName::FormatConstraint: return "format_constraint";
  }
  return "?";
}

std::optional<LayerName> layer_from_string(std::string_view text) {
  if (text == "domain_background") return LayerName::DomainBackground;
  if (text == "task_instructions") return LayerName::TaskInstructions;
  if (text == "current_state") return LayerName::CurrentState;
  if (text == "format_constraint") return LayerName::FormatConstraint;
  return std::nullopt;
}

std::vector<std::string> template_slots(const PromptTemplate& tpl) {
  std::vector<std::string> slots;
  for (const auto& layer : tpl.layers) {
    std::size_t pos = 0, end = 0;
    while ((pos = find_slot(layer.body, pos, &end)) != std::string::npos) {
      const std::string name = layer.body.substr(pos + 1, end - pos - 2);
      if (std::find(slots.begin(), slots.end(), name) == slots.end())
        slots.push_back(name);
      pos = end;
    }
  }
  return slots;
}

void validate_template(const PromptTemplate& tpl) {
  if (tpl.id.empty())
    throw Error(ErrorKind::ManifestError, "template id must be non-empty");
  if (tpl.layers.empty())
    throw Error(ErrorKind::ManifestError,
                "template '" + tpl.id + "' has no layers");
  if (tpl.layers.back().name != LayerName::FormatConstraint)
    throw Error(ErrorKind::ManifestError,
                "template '" + tpl.id +
                    "' must end with a format_constraint layer");
  std::set<std::string> seen;
  for (const auto& layer : tpl.layers) {
    std::size_t pos = 0, end = 0;
    while ((pos = find_slot(layer.body, pos, &end)) != std::string::npos) {
      const std::string name = layer.body.substr(pos + 1, end - pos - 2);
      if (!seen.insert(name).second)
        throw Error(ErrorKind::ManifestError,
                    "template '" + tpl.id + "' uses slot '" + name +
                        "' more than once");
      pos = end;
    }
  }
  if (!tpl.answer_extractor.pattern.empty()) {
    try {
      std::regex re(tpl.answer_extractor.pattern);
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::ManifestError,
                  "template '" + tpl.id +
                      "' answer pattern does not compile: " + e.what());
    }
  }
}

std::string render_prompt(const PromptTemplate& tpl,
                          const flow::ExecutionContext& ctx) {
  std::string out;
  for (const auto& layer : tpl.layers) {
    out += '[';
    out += to_string(layer.name);
    out += "]\n";
    std::size_t pos = 0, end = 0, copied = 0;
    while ((pos = find_slot(layer.body, pos, &end)) != std::string::npos) {
      const std::string name = layer.body.substr(pos + 1, end - pos - 2);
      out.append(layer.body, copied, pos - copied);
      if (ctx.has_value(name)) {
        out += ctx.value_text(name);
      } else if (const auto it = ctx.simulation_state.find(name);
                 it != ctx.simulation_state.end()) {
        out += it->second;
      } else {
        throw Error(ErrorKind::UnresolvedSlot,
                    "slot '" + name + "' in layer '" + to_string(layer.name) +
                        "' of template '" + tpl.id + "' is not resolvable");
      }
      pos = copied = end;
    }
    out.append(layer.body, copied, layer.body.size() - copied);
    if (out.empty() || out.back() != '\n') out += '\n';
    out += '\n';
  }
  return out;
}

std::string extract_answer(const std::string& reply_text,
                           const PromptTemplate& tpl) {
  const std::string& pattern = tpl.answer_extractor.pattern.empty()
                                   ? kDefaultFencePattern
                                   : tpl.answer_extractor.pattern;
  std::regex re;
  try {
    re = std::regex(pattern);
  } catch (const std::regex_error& e) {
    throw Error(ErrorKind::ConfigError,
                "answer pattern for template '" + tpl.id +
                    "' does not compile: " + e.what());
  }
  std::smatch m;
  if (!std::regex_search(reply_text, m, re))
    throw Error(ErrorKind::FormatViolation,
                "reply for template '" + tpl.id +
                    "' contains no answer block matching the required format");
  return m.size() > 1 ? m[1].str() : m[0].str();
}

std::string wrap_in_fence(const std::string& content) {
  return "```\n" + content + "\n```";
}

void TemplateLibrary::add(PromptTemplate tpl) {
  validate_template(tpl);
  for (const auto& existing : templates_)
    if (existing.id == tpl.id)
      throw Error(ErrorKind::ManifestError,
                  "duplicate template id '" + tpl.id + "'");
  templates_.push_back(std::move(tpl));
}

const PromptTemplate& TemplateLibrary::find(const std::string& id) const {
  for (const auto& tpl : templates_)
    if (tpl.id == id) return tpl;
  throw Error(ErrorKind::UnknownTemplate, "no template '" + id + "'");
}

std::vector<std::string> TemplateLibrary::ids() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& tpl : templates_) out.push_back(tpl.id);
  return out;
}

PromptTemplate TemplateLibrary::parse_template(const std::string& text,
                                               const std::string& id) {
  PromptTemplate tpl;
  tpl.id = id;
  PromptLayer* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    ++line_no;
    const bool last = nl == std::string::npos;
    pos = last ? text.size() + 1 : nl + 1;

    if (!current && line.rfind("# answer_pattern:", 0) == 0) {
      std::string pat = line.substr(std::string("# answer_pattern:").size());
      const auto first = pat.find_first_not_of(" \t");
      tpl.answer_extractor.pattern =
          first == std::string::npos ? "" : pat.substr(first);
      continue;
    }
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      const auto name = layer_from_string(line.substr(1, line.size() - 2));
      if (!name)
        throw Error(ErrorKind::ManifestError,
                    "template '" + id + "' line " + std::to_string(line_no) +
                        ": unknown layer '" + line + "'");
      tpl.layers.push_back({*name, ""});
      current = &tpl.layers.back();
      continue;
    }
    if (!current) {
      if (line.empty() || line[0] == '#') continue;
      throw Error(ErrorKind::ManifestError,
                  "template '" + id + "' line " + std::to_string(line_no) +
                      ": content before the first layer marker");
    }
    if (last && line.empty()) break;
    current->body += line;
    current->body += '\n';
  }
  for (auto& layer : tpl.layers) {
    while (!layer.body.empty() && layer.body.back() == '\n')
      layer.body.pop_back();
  }
  validate_template(tpl);
  return tpl;
}

TemplateLibrary TemplateLibrary::load_directory(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorKind::IoError,
                "template directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tpl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  TemplateLibrary lib;
  for (const auto& file : files)
    lib.add(parse_template(detail::read_file(file), file.stem().string()));
  return lib;
}

}  // namespace vaspflow::llm
