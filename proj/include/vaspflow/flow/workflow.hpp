#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vaspflow::flow {

enum class Component { ReadFile, WriteFile, Command, RegexExtractor,
                       GetLLMAnswer };

const char* to_string(Component component);
std::optional<Component> component_from_string(std::string_view text);

enum class OnError { Abort, RecordAndContinue };

/// Binding values starting with '$' name a context key; everything else is
/// a literal. A literal that must begin with '$' is written '$$'.
struct WorkflowStep {
  Component component = Component::ReadFile;
  std::map<std::string, std::string> bindings;
  std::string output_key;
  OnError on_error = OnError::Abort;
};

/// One staged input: the request must supply `role`, and its content lands
/// at `dest` (run-relative) before the first step executes. The same role
/// may be staged to several destinations.
struct InputSpec {
  std::string role;
  std::string dest;
};

struct WorkflowDef {
  std::string id;
  std::string objective;
  std::vector<InputSpec> required_inputs;
  std::vector<WorkflowStep> steps;
};

/// ManifestError unless: non-empty id and steps, unique non-empty
/// output_keys, unique destinations, and every $reference resolvable from a
/// required input role, "request_text", or an earlier step's output_key
/// (dotted sub-keys of an output count).
void validate_workflow(const WorkflowDef& wf);

/// JSON manifest shape:
///   { "id": ..., "objective": ...,
///     "required_inputs": ["POSCAR", {"role": "POTCAR", "dest": "is/POTCAR"}],
///     "steps": [{"component": ..., "bindings": {...},
///                "output_key": ..., "on_error": "Abort"}] }
/// A bare string input stages the role at a path equal to its name;
/// on_error defaults to Abort.
WorkflowDef parse_workflow_manifest(const std::string& json_text,
                                    const std::string& origin);

/// Loads every *.json in the directory; ids must be distinct.
std::vector<WorkflowDef> load_workflow_library(
    const std::filesystem::path& dir);

}  // namespace vaspflow::flow
