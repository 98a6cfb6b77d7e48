#include "vaspflow/flow/engine.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <set>

#include "nlohmann/json.hpp"
#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"
#include "vaspflow/sim/neb.hpp"
#include "vaspflow/vasp/incar.hpp"
#include "vaspflow/vasp/poscar.hpp"

namespace vaspflow::flow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStateFile = ".simstate.json";

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// '$key' resolves from the context, '$$x' is the literal '$x', anything
/// else is passed through.
std::string resolve_binding(const std::string& raw,
                            const ExecutionContext& ctx) {
  if (raw.size() >= 2 && raw[0] == '$') {
    if (raw[1] == '$') return raw.substr(1);
    return ctx.value_text(raw.substr(1));
  }
  return raw;
}


std::string require_binding(const WorkflowStep& step,
                            const std::string& param) {
  const auto it = step.bindings.find(param);
  if (it == step.bindings.end())
    throw Error(ErrorKind::ConfigError,
                std::string(to_string(step.component)) +
                    " step needs a '" + param + "' binding");
  return it->second;
}

std::vector<ExtractionRequest> parse_pattern_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError,
                std::string("patterns binding is not valid JSON: ") +
                    e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw Error(ErrorKind::ConfigError,
                "patterns binding must be a non-empty JSON array");
  std::vector<ExtractionRequest> out;
  for (const auto& item : doc) {
    if (!item.is_object())
      throw Error(ErrorKind::ConfigError,
                  "each pattern must be a JSON object");
    ExtractionRequest req;
    try {
      req.pattern.name = item.at("name").get<std::string>();
      req.pattern.pattern = item.at("pattern").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError,
                  std::string("pattern needs name and pattern fields: ") +
                      e.what());
    }
    const std::string type = item.value("type", "real");
    if (type == "real") {
      req.pattern.capture_type = vasp::CaptureType::Real;
    } else if (type == "int") {
      req.pattern.capture_type = vasp::CaptureType::Int;
    } else if (type == "text") {
      req.pattern.capture_type = vasp::CaptureType::Text;
    } else if (type == "flag") {
      req.pattern.capture_type = vasp::CaptureType::Flag;
    } else {
      throw Error(ErrorKind::ConfigError,
                  "pattern '" + req.pattern.name + "' has unknown type '" +
                      type + "'");
    }
    req.required = item.value("required", true);
    out.push_back(std::move(req));
  }
  return out;
}

std::string render_outcome(const std::string& action,
                           const sim::SimOutcome& outcome) {
  std::string out = "action: " + action + "\n";
  out += "mode: " + outcome.mode + "\n";
  out += std::string("status: ") + sim::to_string(outcome.status) + "\n";
  if (!outcome.failed_rules.empty()) {
    out += "failed rules:";
    for (const auto& rule : outcome.failed_rules) out += " " + rule;
    out += "\n";
  }
  if (!outcome.reason.empty()) out += "reason: " + outcome.reason + "\n";
  for (const auto& note : outcome.notes) out += "note: " + note + "\n";
  if (!outcome.energy_trace.empty()) {
    out += "energy evaluations: " +
           std::to_string(outcome.energy_trace.size()) + "\n";
    out += "final energy (eV): " + fmt_real(outcome.energy_trace.back()) +
           "\n";
  }
  if (outcome.barrier_ev)
    out += "barrier (eV): " + fmt_real(*outcome.barrier_ev) + "\n";
  if (outcome.delta_e_ev)
    out += "delta E (eV): " + fmt_real(*outcome.delta_e_ev) + "\n";
  if (!outcome.files_written.empty()) {
    out += "files:";
    for (const auto& file : outcome.files_written) out += " " + file;
    out += "\n";
  }
  return out;
}

std::optional<std::string> sidecar_isif(const ExecutionContext& ctx,
                                        const fs::path& dir) {
  const fs::path rel = dir / kStateFile;
  if (!fs::exists(ctx.resolve(rel.string()))) return std::nullopt;
  try {
    const json doc = json::parse(ctx.read_file(rel.string()));
    if (!doc.is_object() || !doc.contains("isif")) return std::nullopt;
    const auto& value = doc["isif"];
    return value.is_string() ? value.get<std::string>() : value.dump();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void stamp_sidecar(const ExecutionContext& ctx, const std::string& dir,
                   const std::string& key, const std::string& value) {
  const std::string rel = (fs::path(dir) / kStateFile).string();
  json doc = json::object();
  if (fs::exists(ctx.resolve(rel))) {
    try {
      doc = json::parse(ctx.read_file(rel));
      if (!doc.is_object()) doc = json::object();
    } catch (const std::exception&) {
      doc = json::object();
    }
  }
  doc[key] = value;
  ctx.write_file(rel, doc.dump(2) + "\n");
}

CommandResult command_run_backend(const std::map<std::string, std::string>& args,
                                  ExecutionContext& ctx,
                                  const EngineDeps& deps) {
  const auto it = args.find("dir");
  const std::string dir = it == args.end() ? "." : it->second;
  const std::filesystem::path abs_dir = ctx.resolve(dir);
  sim::SimOutcome outcome;
  try {
    outcome = sim::run_simulation(abs_dir, deps.backend);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::BackendCrash,
                "backend terminated abnormally in '" + dir + "': " + e.what());
  }
  CommandResult result;
  result.output = render_outcome("run_backend", outcome);
  switch (outcome.status) {
    case sim::SimStatus::ConvergedOk: result.status = 0; break;
    case sim::SimStatus::NotConverged: result.status = 1; break;
    case sim::SimStatus::ValidationFailed: result.status = 2; break;
    case sim::SimStatus::Crashed: result.status = 3; break;
  }
  return result;
}

CommandResult command_neb_interpolate(
    const std::map<std::string, std::string>& args, ExecutionContext& ctx) {
  auto need = [&](const char* param) -> const std::string& {
    const auto it = args.find(param);
    if (it == args.end())
      throw Error(ErrorKind::ConfigError,
                  std::string("neb_interpolate needs a '") + param +
                      "' argument");
    return it->second;
  };
  const std::string dir = need("dir");
  const std::string init_path = need("init");
  const std::string final_path = need("final");

  const auto incar =
      vasp::parse_incar(ctx.read_file((fs::path(dir) / "INCAR").string()));
  const auto images = incar.get_int("IMAGES");
  if (!images || *images < 1)
    return {3, "IMAGES is not set in " + dir +
                   "/INCAR; the interpolation needs the image count"};
  const int n = static_cast<int>(*images);

  const auto initial = vasp::parse_poscar(ctx.read_file(init_path));
  const auto final_s = vasp::parse_poscar(ctx.read_file(final_path));

  // Endpoint relaxations record their ISIF in a sidecar; a cell-shape
  // relaxation (ISIF=3) makes the two endpoint cells unreliable, so the
  // fact is stamped through to the NEB directory and the interpolation
  // refuses outright.
  std::optional<std::string> endpoint_isif;
  for (const auto& endpoint : {init_path, final_path}) {
    const auto isif = sidecar_isif(ctx, fs::path(endpoint).parent_path());
    if (isif && (!endpoint_isif || *isif == "3")) endpoint_isif = *isif;
  }
  if (endpoint_isif) {
    stamp_sidecar(ctx, dir, "endpoint_isif", *endpoint_isif);
    if (*endpoint_isif == "3")
      throw Error(ErrorKind::CellMismatch,
                  "endpoint relaxations used ISIF=3, so the endpoint cells "
                  "are not guaranteed equal; refusing to interpolate");
  }

  const auto interior = sim::neb_interpolate(initial, final_s, n);

  auto image_dir = [](int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", index);
    return std::string(buf);
  };
  auto write_image = [&](int index, const vasp::CrystalStructure& s) {
    ctx.write_file((fs::path(dir) / image_dir(index) / "POSCAR").string(),
                   vasp::write_poscar(s));
  };
  write_image(0, initial);
  for (int i = 0; i < n; ++i)
    write_image(i + 1, interior[static_cast<std::size_t>(i)]);
  write_image(n + 1, final_s);

  return {0, "interpolated " + std::to_string(n) + " interior images into " +
                 dir + "/" + image_dir(0) + ".." + image_dir(n + 1)};
}

}  // namespace

std::string run_read_file(const std::string& path, ExecutionContext& ctx) {
  return ctx.read_file(path);
}

void run_write_file(const std::string& path, const std::string& content,
                    ExecutionContext& ctx) {
  ctx.write_file(path, content);
}

CommandResult run_command(const std::string& action,
                          const std::map<std::string, std::string>& args,
                          ExecutionContext& ctx, const EngineDeps& deps) {
  if (action == "noop") {
    const auto it = args.find("text");
    return {0, it == args.end() ? "noop" : it->second};
  }
  if (action == "run_backend") return command_run_backend(args, ctx, deps);
  if (action == "neb_interpolate") return command_neb_interpolate(args, ctx);
  throw Error(ErrorKind::DisallowedCommand,
              "command '" + action +
                  "' is not in the allow-list {run_backend, neb_interpolate, "
                  "noop}");
}

std::map<std::string, std::string> run_regex_extractor(
    const std::string& source_key,
    const std::vector<ExtractionRequest>& patterns, ExecutionContext& ctx) {
  const ContextValue& value = ctx.value(source_key);
  const std::string* text = std::get_if<std::string>(&value);
  if (!text)
    throw Error(ErrorKind::ContextKeyError,
                "context value '" + source_key + "' is not text");

  std::vector<vasp::ExtractionPattern> specs;
  specs.reserve(patterns.size());
  for (const auto& p : patterns) specs.push_back(p.pattern);
  auto captures = vasp::apply_extraction_patterns(*text, specs);

  std::string missing;
  for (const auto& p : patterns) {
    if (!p.required) continue;
    const auto hit = captures.find(p.pattern.name);
    if (p.pattern.capture_type == vasp::CaptureType::Flag) {
      // a required flag must have matched; mark it optional to accept "false"
      if (hit != captures.end() && hit->second == "true") continue;
    } else if (hit != captures.end()) {
      continue;
    }
    if (!missing.empty()) missing += ", ";
    missing += p.pattern.name;
  }
  if (!missing.empty())
    throw Error(ErrorKind::MissingRequiredQuantity,
                "required patterns matched nothing in '" + source_key +
                    "': " + missing);
  return captures;
}

std::string run_get_llm_answer(const std::string& template_id,
                               ExecutionContext& ctx, const EngineDeps& deps) {
  if (!deps.llm)
    throw Error(ErrorKind::ConfigError,
                "GetLLMAnswer needs an LLM client configured");
  if (!deps.templates)
    throw Error(ErrorKind::ConfigError,
                "GetLLMAnswer needs a template library configured");
  const auto& tpl = deps.templates->find(template_id);
  const std::string prompt = llm::render_prompt(tpl, ctx);

  llm::LlmRequest request;
  request.rendered_prompt = prompt;
  request.max_answer_length = deps.max_answer_length;
  request.provider_model = deps.provider_model;
  request.template_id = template_id;
  request.invocation_index = ctx.next_invocation(template_id);
  const auto response = deps.llm->complete(request);
  try {
    return llm::extract_answer(response.text, tpl);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FormatViolation) throw;
    llm::LlmRequest retry = request;
    retry.rendered_prompt +=
        "[format_constraint]\nThe previous reply was rejected: " +
        std::string(e.what()) +
        "\nAnswer again and respect the required format exactly.\n\n";
    retry.invocation_index = ctx.next_invocation(template_id);
    const auto second = deps.llm->complete(retry);
    return llm::extract_answer(second.text, tpl);
  }
}

const WorkflowDef& select_workflow(const TaskRequest& req,
                                   const std::vector<WorkflowDef>& library,
                                   llm::LlmClient* llm) {
  if (library.empty())
    throw Error(ErrorKind::ConfigError, "workflow library is empty");

  auto finish = [&](const WorkflowDef& wf) -> const WorkflowDef& {
    std::string missing;
    for (const auto& input : wf.required_inputs) {
      if (req.input_files.count(input.role)) continue;
      if (missing.find("'" + input.role + "'") != std::string::npos) continue;
      if (!missing.empty()) missing += ", ";
      missing += "'" + input.role + "'";
    }
    if (!missing.empty())
      throw Error(ErrorKind::MissingInputs,
                  "workflow '" + wf.id + "' needs input roles " + missing);
    return wf;
  };

  if (req.task_hint) {
    const std::string prefix = lowercase(score::to_string(*req.task_hint));
    const WorkflowDef* best = nullptr;
    for (const auto& wf : library) {
      if (lowercase(wf.id).rfind(prefix, 0) != 0) continue;
      if (!best || wf.id < best->id) best = &wf;
    }
    if (!best)
      throw Error(ErrorKind::NoMatchingWorkflow,
                  "no workflow id starts with '" + prefix + "' (task hint " +
                      score::to_string(*req.task_hint) + ")");
    return finish(*best);
  }

  if (!llm)
    throw Error(ErrorKind::ConfigError,
                "workflow selection without a task hint needs an LLM client");

  std::string menu;
  std::string valid_ids;
  for (const auto& wf : library) {
    menu += "- " + wf.id + ": " + wf.objective + "\n";
    if (!valid_ids.empty()) valid_ids += ", ";
    valid_ids += wf.id;
  }
  const std::string prompt =
      "[domain_background]\n"
      "You route requests for an autonomous first-principles materials "
      "computation service. A workflow is a fixed sequence of simulation "
      "steps.\n\n"
      "[task_instructions]\n"
      "Pick the single workflow whose objective best matches the user "
      "request. Workflow library:\n" +
      menu +
      "\n[current_state]\nUser request: " + req.request_text +
      "\n\n[format_constraint]\nReply with exactly one fenced code block "
      "containing only the chosen workflow id.\n";

  llm::PromptTemplate fence_only;
  fence_only.id = "select_workflow";
  fence_only.layers.push_back({llm::LayerName::FormatConstraint, ""});

  auto match = [&](const std::string& reply) -> const WorkflowDef* {
    std::string answer;
    try {
      answer = trimmed(llm::extract_answer(reply, fence_only));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FormatViolation) throw;
      answer = trimmed(reply);
    }
    for (const auto& wf : library)
      if (wf.id == answer) return &wf;
    const WorkflowDef* unique = nullptr;
    for (const auto& wf : library) {
      if (answer.find(wf.id) == std::string::npos) continue;
      if (unique) return nullptr;
      unique = &wf;
    }
    return unique;
  };

  llm::LlmRequest request;
  request.rendered_prompt = prompt;
  request.template_id = "select_workflow";
  request.invocation_index = 0;
  const auto first = llm->complete(request);
  if (const auto* wf = match(first.text)) return finish(*wf);

  llm::LlmRequest retry = request;
  retry.rendered_prompt +=
      "\n[format_constraint]\nYour previous answer did not name a workflow "
      "id from the library. Valid ids: " +
      valid_ids +
      ". Reply with exactly one fenced code block containing one of them.\n";
  retry.invocation_index = 1;
  const auto second = llm->complete(retry);
  if (const auto* wf = match(second.text)) return finish(*wf);

  throw Error(ErrorKind::NoMatchingWorkflow,
              "the model did not name a library workflow; valid ids: " +
                  valid_ids);
}

TaskResult execute_workflow(const WorkflowDef& wf, ExecutionContext& ctx,
                            const EngineDeps& deps) {
  std::set<std::string> preexisting;
  for (const auto& [key, value] : ctx.values()) preexisting.insert(key);

  TaskResult result;
  result.status = TaskStatus::Completed;

  for (std::size_t i = 0; i < wf.steps.size(); ++i) {
    const auto& step = wf.steps[i];
    const int step_no = static_cast<int>(i) + 1;
    const auto start = std::chrono::steady_clock::now();
    std::string outcome;
    std::string error_text;
    bool success = true;

    try {
      switch (step.component) {
        case Component::ReadFile: {
          const std::string path =
              resolve_binding(require_binding(step, "path"), ctx);
          std::string text = run_read_file(path, ctx);
          outcome = "read " + path + " (" + std::to_string(text.size()) +
                    " bytes)";
          ctx.set_value(step.output_key, std::move(text));
          break;
        }
        case Component::WriteFile: {
          const std::string path =
              resolve_binding(require_binding(step, "path"), ctx);
          const std::string content =
              resolve_binding(require_binding(step, "content"), ctx);
          run_write_file(path, content, ctx);
          outcome = "wrote " + path + " (" + std::to_string(content.size()) +
                    " bytes)";
          ctx.set_value(step.output_key, path);
          break;
        }
        case Component::Command: {
          const std::string action = require_binding(step, "command");
          std::map<std::string, std::string> args;
          for (const auto& [param, raw] : step.bindings)
            if (param != "command") args[param] = resolve_binding(raw, ctx);
          const auto command = run_command(action, args, ctx, deps);
          success = command.status == 0;
          outcome = action + " status " + std::to_string(command.status);
          ctx.set_value(step.output_key, command.output);
          ctx.set_value(step.output_key + ".status",
                        std::to_string(command.status));
          break;
        }
        case Component::RegexExtractor: {
          const std::string source_raw = require_binding(step, "source");
          if (source_raw.size() < 2 || source_raw[0] != '$' ||
              source_raw[1] == '$')
            throw Error(ErrorKind::ConfigError,
                        "RegexExtractor 'source' must be a $context "
                        "reference");
          const std::string source_key = source_raw.substr(1);
          const auto patterns =
              parse_pattern_spec(require_binding(step, "patterns"));
          const auto captures =
              run_regex_extractor(source_key, patterns, ctx);

          json summary = json::object();
          for (const auto& p : patterns) {
            const auto it = captures.find(p.pattern.name);
            if (it == captures.end()) continue;
            switch (p.pattern.capture_type) {
              case vasp::CaptureType::Real:
                summary[it->first] = *detail::to_double(it->second);
                break;
              case vasp::CaptureType::Int:
                summary[it->first] = *detail::to_int(it->second);
                break;
              case vasp::CaptureType::Flag:
                summary[it->first] = it->second == "true";
                break;
              case vasp::CaptureType::Text:
                summary[it->first] = it->second;
                break;
            }
            ctx.set_value(step.output_key + "." + it->first, it->second);
          }
          ctx.set_value(step.output_key, summary.dump());
          outcome = "extracted " + std::to_string(captures.size()) +
                    " of " + std::to_string(patterns.size()) + " patterns";
          break;
        }
        case Component::GetLLMAnswer: {
          const std::string template_id = require_binding(step, "template");
          std::string answer = run_get_llm_answer(template_id, ctx, deps);
          outcome = "answer for template '" + template_id + "' (" +
                    std::to_string(answer.size()) + " bytes)";
          ctx.set_value(step.output_key, std::move(answer));
          break;
        }
      }
    } catch (const std::exception& e) {
      success = false;
      error_text = e.what();
      outcome = std::string("error: ") + e.what();
    }

    const auto elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    ctx.history.push_back(
        {step_no, to_string(step.component), outcome, success, elapsed});

    if (!success && step.on_error == OnError::Abort) {
      result.status = TaskStatus::Failed;
      result.failed_step = step_no;
      result.error = error_text.empty() ? outcome : error_text;
      break;
    }
  }

  for (const auto& [key, value] : ctx.values())
    if (!preexisting.count(key)) result.outputs[key] = to_text(value);

  std::string report = "workflow: " + wf.id + "\n";
  report += "status: ";
  if (result.status == TaskStatus::Completed) {
    report += "Completed\n";
  } else {
    report += "Failed at step " + std::to_string(result.failed_step) + " (" +
              result.error + ")\n";
  }
  report += "steps:\n";
  for (const auto& entry : ctx.history) {
    report += "  " + std::to_string(entry.step) + ". " + entry.component +
              ": " + entry.outcome + "\n";
  }
  if (!result.outputs.empty()) {
    report += "outputs: ";
    bool first = true;
    for (const auto& [key, value] : result.outputs) {
      if (!first) report += ", ";
      report += key;
      first = false;
    }
    report += "\n";
  }
  result.report_text = report;

  json record;
  record["schema_version"] = 1;
  record["workflow"] = wf.id;
  record["status"] =
      result.status == TaskStatus::Completed ? "Completed" : "Failed";
  if (result.status == TaskStatus::Failed) {
    record["failed_step"] = result.failed_step;
    record["error"] = result.error;
  }
  json history = json::array();
  for (const auto& entry : ctx.history) {
    history.push_back({{"step", entry.step},
                       {"component", entry.component},
                       {"outcome", entry.outcome},
                       {"success", entry.success},
                       {"wall_ms", entry.wall_ms}});
  }
  record["history"] = std::move(history);
  json outputs = json::object();
  for (const auto& [key, value] : result.outputs) outputs[key] = value;
  record["outputs"] = std::move(outputs);
  ctx.write_file("run_record.json", record.dump(2) + "\n");

  return result;
}

TaskResult run_task(const TaskRequest& req,
                    const std::vector<WorkflowDef>& library,
                    const fs::path& working_dir, const EngineDeps& deps) {
  const auto& wf = select_workflow(req, library, deps.llm);
  fs::create_directories(working_dir);
  ExecutionContext ctx(working_dir);
  for (const auto& input : wf.required_inputs)
    ctx.write_file(input.dest, req.input_files.at(input.role));
  for (const auto& input : wf.required_inputs)
    if (!ctx.has_value(input.role))
      ctx.set_value(input.role, req.input_files.at(input.role));
  ctx.set_value("request_text", req.request_text);
  return execute_workflow(wf, ctx, deps);
}

}  // namespace vaspflow::flow
