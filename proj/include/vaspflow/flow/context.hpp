#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "vaspflow/vasp/incar.hpp"
#include "vaspflow/vasp/outcar.hpp"
#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::flow {

/// A typed value threaded between workflow steps: raw text, a parsed
/// structure, an INCAR document, or an OUTCAR summary. Anything can be
/// rendered back to text for prompt slots and reports.
using ContextValue = std::variant<std::string, vasp::CrystalStructure,
                                  vasp::IncarDocument, vasp::OutcarSummary>;

std::string to_text(const ContextValue& value);

struct HistoryEntry {
  int step = 0;  // 1-based position in the workflow
  std::string component;
  std::string outcome;
  bool success = false;
  double wall_ms = 0.0;
};

/// Per-run state: a sandboxed working directory, an immutable key-value
/// store, the execution history, and free-form simulation notes that prompt
/// rendering may reference. One context belongs to exactly one run.
class ExecutionContext {
 public:
  explicit ExecutionContext(std::filesystem::path working_dir);

  const std::filesystem::path& working_dir() const { return working_dir_; }

  const std::map<std::string, ContextValue>& values() const { return values_; }
  bool has_value(const std::string& key) const;
  /// Throws ContextKeyError when the key is absent.
  const ContextValue& value(const std::string& key) const;
  /// Values are write-once; a second set of the same key is ContextKeyError.
  void set_value(const std::string& key, ContextValue value);
  /// The stored value rendered as text (POSCAR / INCAR writers for typed
  /// values). Throws ContextKeyError when the key is absent.
  std::string value_text(const std::string& key) const;

  /// Returns the current invocation index for a template and advances it.
  /// The counter is owned by this run; fresh contexts always start at 0.
  int next_invocation(const std::string& template_id);

  /// Maps a run-relative path to an absolute one inside working_dir.
  /// Absolute inputs and any '..' component are PathEscape.
  std::filesystem::path resolve(const std::string& relative) const;
  /// Sandboxed I/O used by every engine component. Reads throw IoError when
  /// the file is missing; writes create parent directories as needed.
  std::string read_file(const std::string& relative) const;
  void write_file(const std::string& relative, const std::string& content) const;

  std::map<std::string, std::string> simulation_state;
  std::vector<HistoryEntry> history;

  /// Test hook: observes every sandboxed read/write with the resolved path.
  std::function<void(std::string_view op, const std::filesystem::path& path)>
      file_observer;

 private:
  std::filesystem::path working_dir_;
  std::map<std::string, ContextValue> values_;
  std::map<std::string, int> invocations_;
};

}  // namespace vaspflow::flow
