#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vaspflow/flow/context.hpp"
#include "vaspflow/flow/workflow.hpp"
#include "vaspflow/llm/client.hpp"
#include "vaspflow/llm/prompt.hpp"
#include "vaspflow/score/scoring.hpp"
#include "vaspflow/sim/backend.hpp"
#include "vaspflow/vasp/outcar.hpp"

namespace vaspflow::flow {

struct TaskRequest {
  std::string request_text;
  std::map<std::string, std::string> input_files;  // role -> file content
  std::optional<score::TaskType> task_hint;
};

enum class TaskStatus { Completed, Failed };

struct TaskResult {
  TaskStatus status = TaskStatus::Failed;
  int failed_step = 0;  // 1-based; 0 when completed
  std::string error;
  std::map<std::string, std::string> outputs;  // step outputs, as text
  std::string report_text;
};

/// Everything a workflow execution may need. llm and templates may stay
/// null for workflows without GetLLMAnswer steps.
struct EngineDeps {
  llm::LlmClient* llm = nullptr;
  const llm::TemplateLibrary* templates = nullptr;
  sim::BackendConfig backend = sim::default_backend_config();
  std::string provider_model;
  int max_answer_length = 4096;
};

/// A task_hint picks the workflow whose id starts with the lowercased task
/// type, bypassing the LLM entirely. Otherwise the client is shown the
/// request plus every objective and must answer with one id (one retry on
/// an unusable answer). Either path then checks required inputs.
/// Errors: NoMatchingWorkflow, MissingInputs, ConfigError (no client and no
/// hint).
const WorkflowDef& select_workflow(const TaskRequest& req,
                                   const std::vector<WorkflowDef>& library,
                                   llm::LlmClient* llm);

/// Runs the steps strictly in order against a context whose inputs are
/// already staged and seeded. Appends one history entry per executed step,
/// honours each step's on_error policy, and always writes run_record.json
/// into the working directory before returning. Never throws for step
/// failures; those end up in the result.
TaskResult execute_workflow(const WorkflowDef& wf, ExecutionContext& ctx,
                            const EngineDeps& deps);

/// select_workflow + staging + execute_workflow in one call: stages every
/// required input at its destination, seeds context values (each role plus
/// "request_text"), then executes.
TaskResult run_task(const TaskRequest& req,
                    const std::vector<WorkflowDef>& library,
                    const std::filesystem::path& working_dir,
                    const EngineDeps& deps);

// The five component operations, exposed for direct use in tests.

std::string run_read_file(const std::string& path, ExecutionContext& ctx);

void run_write_file(const std::string& path, const std::string& content,
                    ExecutionContext& ctx);

struct CommandResult {
  int status = 0;  // 0 ok, nonzero = ran and reported failure
  std::string output;
};

/// Allow-list: run_backend (args: dir), neb_interpolate (args: dir, init,
/// final), noop (args: text). Anything else is DisallowedCommand. A backend
/// that terminates abnormally is BackendCrash; a backend that runs and
/// reports failure is a nonzero status in the result.
CommandResult run_command(const std::string& action,
                          const std::map<std::string, std::string>& args,
                          ExecutionContext& ctx, const EngineDeps& deps);

struct ExtractionRequest {
  vasp::ExtractionPattern pattern;
  bool required = true;
};

/// Applies the patterns to the text stored at source_key. A required pattern
/// that matched nothing (for flags: did not fire) raises
/// MissingRequiredQuantity, all-or-nothing; optional non-flag patterns are
/// simply absent from the result and optional flags report "false".
std::map<std::string, std::string> run_regex_extractor(
    const std::string& source_key,
    const std::vector<ExtractionRequest>& patterns, ExecutionContext& ctx);

/// Renders the template against the context (resolution errors surface
/// before any LLM traffic), asks the client, and applies the answer
/// extractor; one retry with an error-explaining follow-up on a format
/// violation, then the violation propagates.
std::string run_get_llm_answer(const std::string& template_id,
                               ExecutionContext& ctx, const EngineDeps& deps);

}  // namespace vaspflow::flow
