#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vaspflow/flow/context.hpp"
#include "vaspflow/vasp/outcar.hpp"

namespace vaspflow::llm {

/// The four fixed layers of a prompt, rendered in this order. Every template
/// must end with a format_constraint layer so the model is always told what
/// shape of answer the caller can execute.
enum class LayerName {
  DomainBackground,
  TaskInstructions,
  CurrentState,
  FormatConstraint,
};

const char* to_string(LayerName name);
std::optional<LayerName> layer_from_string(std::string_view text);

struct PromptLayer {
  LayerName name = LayerName::DomainBackground;
  std::string body;  // may contain {slot} references
};

/// answer_extractor.pattern empty means the default rule: the first fenced
/// code block of the reply, with an optional language tag after the opening
/// fence. A custom pattern is an ECMAScript regex applied to the whole reply
/// whose capture group 1 is the answer.
struct PromptTemplate {
  std::string id;
  std::vector<PromptLayer> layers;
  vasp::ExtractionPattern answer_extractor{"answer", "",
                                           vasp::CaptureType::Text};
};

/// Slot grammar: '{' [A-Za-z_][A-Za-z0-9_.]* '}'. Anything else between
/// braces is left untouched. Returns slots in order of first appearance.
std::vector<std::string> template_slots(const PromptTemplate& tpl);

/// ManifestError unless: at least one layer, a format_constraint present and
/// last, no slot name used twice, and a non-empty id.
void validate_template(const PromptTemplate& tpl);

/// Concatenates the layers in order, each under a "[layer_name]" header
/// line, substituting every slot literally from ctx values first and
/// simulation_state second. UnresolvedSlot names both the slot and the layer.
std::string render_prompt(const PromptTemplate& tpl,
                          const flow::ExecutionContext& ctx);

/// Applies the template's answer extractor to a raw reply and returns the
/// matched block only; FormatViolation when nothing matches. With several
/// fenced blocks the first one wins.
std::string extract_answer(const std::string& reply_text,
                           const PromptTemplate& tpl);

/// Wraps block content in a plain fence the way the shipped templates ask
/// for; extract_answer inverts it for any content free of "```".
std::string wrap_in_fence(const std::string& content);

class TemplateLibrary {
 public:
  /// Validates, then refuses duplicate ids (ManifestError).
  void add(PromptTemplate tpl);
  const PromptTemplate& find(const std::string& id) const;  // UnknownTemplate
  std::vector<std::string> ids() const;
  std::size_t size() const { return templates_.size(); }

  /// Loads every *.tpl file in the directory. File format: an optional
  /// "# answer_pattern: REGEX" line, then "[layer_name]" marker lines each
  /// introducing that layer's body. The template id is the file stem.
  static TemplateLibrary load_directory(const std::filesystem::path& dir);
  static PromptTemplate parse_template(const std::string& text,
                                       const std::string& id);

 private:
  std::vector<PromptTemplate> templates_;
};

}  // namespace vaspflow::llm
