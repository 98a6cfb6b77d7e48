#include "vaspflow/flow/context.hpp"

#include <cstdio>

#include "vaspflow/detail/io.hpp"
#include "vaspflow/errors.hpp"
#include "vaspflow/vasp/poscar.hpp"

namespace vaspflow::flow {

namespace fs = std::filesystem;

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string summary_text(const vasp::OutcarSummary& s) {
  std::string out;
  out += "final energy (eV): " + fmt_real(s.final_energy_ev) + "\n";
  out += std::string("converged: ") + (s.converged ? "true" : "false") + "\n";
  out += "ionic steps: " + std::to_string(s.n_ionic_steps) + "\n";
  if (s.max_force_ev_per_a)
    out += "max force (eV/A): " + fmt_real(*s.max_force_ev_per_a) + "\n";
  if (s.fermi_energy_ev)
    out += "fermi energy (eV): " + fmt_real(*s.fermi_energy_ev) + "\n";
  if (s.eigenvalue_table)
    out += "eigenvalue rows: " + std::to_string(s.eigenvalue_table->size()) +
           "\n";
  return out;
}

}  // namespace

std::string to_text(const ContextValue& value) {
  struct Visitor {
    std::string operator()(const std::string& text) const { return text; }
    std::string operator()(const vasp::CrystalStructure& s) const {
      return vasp::write_poscar(s);
    }
    std::string operator()(const vasp::IncarDocument& d) const {
      return vasp::write_incar(d);
    }
    std::string operator()(const vasp::OutcarSummary& s) const {
      return summary_text(s);
    }
  };
  return std::visit(Visitor{}, value);
}

ExecutionContext::ExecutionContext(fs::path working_dir)
    : working_dir_(std::move(working_dir)) {}

bool ExecutionContext::has_value(const std::string& key) const {
  return values_.count(key) != 0;
}

const ContextValue& ExecutionContext::value(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw Error(ErrorKind::ContextKeyError, "no context value '" + key + "'");
  return it->second;
}

void ExecutionContext::set_value(const std::string& key, ContextValue value) {
  if (key.empty())
    throw Error(ErrorKind::ContextKeyError, "context key must be non-empty");
  const auto [it, inserted] = values_.emplace(key, std::move(value));
  (void)it;
  if (!inserted)
    throw Error(ErrorKind::ContextKeyError,
                "context value '" + key + "' is already set; values are "
                "immutable once written");
}

std::string ExecutionContext::value_text(const std::string& key) const {
  return to_text(value(key));
}

int ExecutionContext::next_invocation(const std::string& template_id) {
  return invocations_[template_id]++;
}

fs::path ExecutionContext::resolve(const std::string& relative) const {
  const fs::path rel(relative);
  if (rel.is_absolute())
    throw Error(ErrorKind::PathEscape,
                "absolute path '" + relative + "' is outside the sandbox");
  for (const auto& part : rel)
    if (part == "..")
      throw Error(ErrorKind::PathEscape,
                  "path '" + relative + "' escapes the working directory");
  return (working_dir_ / rel).lexically_normal();
}

std::string ExecutionContext::read_file(const std::string& relative) const {
  const fs::path path = resolve(relative);
  if (file_observer) file_observer("read", path);
  if (!fs::exists(path))
    throw Error(ErrorKind::IoError, "file not found: " + relative);
  return detail::read_file(path);
}

void ExecutionContext::write_file(const std::string& relative,
                                  const std::string& content) const {
  const fs::path path = resolve(relative);
  if (file_observer) file_observer("write", path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file(path, content);
}

}  // namespace vaspflow::flow
