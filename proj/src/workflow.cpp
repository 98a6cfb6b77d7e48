#include "vaspflow/flow/workflow.hpp"

#include <algorithm>
#include <set>

#include "nlohmann/json.hpp"
#include "vaspflow/detail/io.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::flow {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Component component) {
  switch (component) {
    case Component::ReadFile: return "ReadFile";
    case Component::WriteFile: return "WriteFile";
    case Component::Command: return "Command";
    case Component::RegexExtractor: return "RegexExtractor";
    case Component::GetLLMAnswer: return "GetLLMAnswer";
  }
  return "?";
}

std::optional<Component> component_from_string(std::string_view text) {
  if (text == "ReadFile") return Component::ReadFile;
  if (text == "WriteFile") return Component::WriteFile;
  if (text == "Command") return Component::Command;
  if (text == "RegexExtractor") return Component::RegexExtractor;
  if (text == "GetLLMAnswer") return Component::GetLLMAnswer;
  return std::nullopt;
}

void validate_workflow(const WorkflowDef& wf) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::ManifestError,
                "workflow '" + wf.id + "': " + what);
  };
  if (wf.id.empty())
    throw Error(ErrorKind::ManifestError, "workflow id must be non-empty");
  if (wf.steps.empty()) fail("step list must be non-empty");

  std::set<std::string> roles;
  std::set<std::string> dests;
  for (const auto& input : wf.required_inputs) {
    if (input.role.empty() || input.dest.empty())
      fail("required input roles and destinations must be non-empty");
    roles.insert(input.role);
    if (!dests.insert(input.dest).second)
      fail("two inputs stage to the same destination '" + input.dest + "'");
  }

  std::set<std::string> produced;
  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& step = wf.steps[i];
    const std::string where = "step " + std::to_string(i + 1);
    if (step.output_key.empty()) fail(where + " has an empty output_key");
    for (const auto& [param, raw] : step.bindings) {
      if (param.empty()) fail(where + " has an empty binding name");
      if (raw.size() < 2 || raw[0] != '$' || raw[1] == '$') continue;
      const std::string key = raw.substr(1);
      const std::string base = key.substr(0, key.find('.'));
      if (key == "request_text" || roles.count(key) || produced.count(key) ||
          produced.count(base))
        continue;
      fail(where + " binding '" + param + "' references '" + key +
           "', which is neither a required input nor an earlier output");
    }
    if (!produced.insert(step.output_key).second)
      fail("output_key '" + step.output_key + "' is used twice");
  }
}

WorkflowDef parse_workflow_manifest(const std::string& json_text,
                                    const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ManifestError,
                origin + ": not valid JSON: " + e.what());
  }
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::ManifestError, origin + ": " + what);
  };
  if (!doc.is_object()) fail("manifest must be a JSON object");

  WorkflowDef wf;
  try {
    wf.id = doc.at("id").get<std::string>();
    wf.objective = doc.value("objective", std::string());
    for (const auto& item : doc.value("required_inputs", json::array())) {
      if (item.is_string()) {
        wf.required_inputs.push_back(
            {item.get<std::string>(), item.get<std::string>()});
      } else if (item.is_object()) {
        wf.required_inputs.push_back(
            {item.at("role").get<std::string>(),
             item.at("dest").get<std::string>()});
      } else {
        fail("required_inputs entries must be strings or {role, dest}");
      }
    }
    if (!doc.contains("steps") || !doc["steps"].is_array())
      fail("manifest needs a steps array");
    for (const auto& raw : doc["steps"]) {
      WorkflowStep step;
      const auto component =
          component_from_string(raw.at("component").get<std::string>());
      if (!component)
        fail("unknown component '" + raw["component"].get<std::string>() +
             "'");
      step.component = *component;
      step.output_key = raw.at("output_key").get<std::string>();
      const json bindings = raw.value("bindings", json::object());
      for (const auto& [param, value] : bindings.items()) {
        if (!value.is_string())
          fail("binding '" + param + "' must be a string");
        step.bindings[param] = value.get<std::string>();
      }
      const std::string policy = raw.value("on_error", "Abort");
      if (policy == "Abort") {
        step.on_error = OnError::Abort;
      } else if (policy == "RecordAndContinue") {
        step.on_error = OnError::RecordAndContinue;
      } else {
        fail("unknown on_error policy '" + policy + "'");
      }
      wf.steps.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    fail(std::string("missing or mistyped field: ") + e.what());
  }
  validate_workflow(wf);
  return wf;
}

std::vector<WorkflowDef> load_workflow_library(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorKind::IoError,
                "workflow directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<WorkflowDef> library;
  for (const auto& file : files) {
    auto wf = parse_workflow_manifest(detail::read_file(file),
                                      file.filename().string());
    for (const auto& existing : library)
      if (existing.id == wf.id)
        throw Error(ErrorKind::ManifestError,
                    "duplicate workflow id '" + wf.id + "' in " +
                        file.filename().string());
    library.push_back(std::move(wf));
  }
  return library;
}

}  // namespace vaspflow::flow
