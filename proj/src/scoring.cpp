#include "vaspflow/score/scoring.hpp"

#include <cmath>
#include <set>

#include "vaspflow/errors.hpp"

namespace vaspflow::score {

namespace {

double item_weight(std::size_t n) {
  if (n == 0)
    throw Error(ErrorKind::BadScoreInput, "cannot score an empty item list");
  return 100.0 / static_cast<double>(n);
}

std::optional<double> relative_error(const std::optional<double>& pred,
                                     double truth) {
  if (!pred.has_value() || truth == 0.0) return std::nullopt;
  return std::abs(*pred - truth) / std::abs(truth);
}

void finish(ScoreBreakdown& b) {
  for (const auto& item : b.per_item) {
    b.completion_total += item.completion;
    b.accuracy_total += item.accuracy;
  }
}

}  // namespace

std::string to_string(TaskType t) {
  switch (t) {
    case TaskType::SR: return "SR";
    case TaskType::BS: return "BS";
    case TaskType::AE: return "AE";
    case TaskType::TS: return "TS";
  }
  return "unknown";
}

double ratio_score(double pred, double truth) {
  if (!std::isfinite(pred) || !std::isfinite(truth))
    throw Error(ErrorKind::BadScoreInput, "ratio_score needs finite inputs");
  const double a = std::abs(pred);
  const double b = std::abs(truth);
  if (a == 0.0 && b == 0.0) return 1.0;
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::min(a, b) / std::max(a, b);
}

ScoreBreakdown score_sr(const std::vector<SrItem>& items, const SoapParams& soap,
                        const ScoringOptions& options) {
  const double w = item_weight(items.size());
  ScoreBreakdown b;
  b.task_type = TaskType::SR;
  for (const auto& item : items) {
    PerItemScore s;
    s.id = item.id;
    s.completion = item.converged ? w : 0.0;
    if (item.predicted.has_value() &&
        !(options.couple_accuracy_to_completion && !item.converged)) {
      const SoapVector pred = soap_descriptor(*item.predicted, soap);
      const SoapVector ref = soap_descriptor(item.reference, soap);
      s.accuracy = w * soap_similarity(pred, ref);
    }
    b.per_item.push_back(std::move(s));
  }
  finish(b);
  return b;
}

ScoreBreakdown score_bs(const std::vector<BsItem>& items,
                        const ScoringOptions& options) {
  const double w = item_weight(items.size());
  ScoreBreakdown b;
  b.task_type = TaskType::BS;
  for (const auto& item : items) {
    PerItemScore s;
    s.id = item.id;
    s.completion = item.completed ? w : 0.0;
    s.relative_error = relative_error(item.gap_pred_ev, item.gap_true_ev);
    if (item.gap_pred_ev.has_value() &&
        !(options.couple_accuracy_to_completion && !item.completed))
      s.accuracy = w * ratio_score(*item.gap_pred_ev, item.gap_true_ev);
    b.per_item.push_back(std::move(s));
  }
  finish(b);
  return b;
}

ScoreBreakdown score_ae(const std::vector<AeItem>& items,
                        const ScoringOptions& options) {
  const double w = item_weight(items.size());
  ScoreBreakdown b;
  b.task_type = TaskType::AE;
  for (const auto& item : items) {
    PerItemScore s;
    s.id = item.id;
    const double raw = 2.0 * item.flags.co_relaxed +
                       3.0 * item.flags.surface_relaxed +
                       5.0 * item.flags.adsorbed_relaxed;
    s.completion = w * raw / 10.0;
    s.relative_error = relative_error(item.e_ads_pred_ev, item.e_ads_true_ev);
    const bool full = item.flags.co_relaxed && item.flags.surface_relaxed &&
                      item.flags.adsorbed_relaxed;
    if (item.e_ads_pred_ev.has_value() &&
        !(options.couple_accuracy_to_completion && !full))
      s.accuracy = w * ratio_score(*item.e_ads_pred_ev, item.e_ads_true_ev);
    b.per_item.push_back(std::move(s));
  }
  finish(b);
  return b;
}

ScoreBreakdown score_ts(const std::vector<TsItem>& items,
                        const ScoringOptions& options) {
  const double w = item_weight(items.size());
  ScoreBreakdown b;
  b.task_type = TaskType::TS;
  for (const auto& item : items) {
    PerItemScore s;
    s.id = item.id;
    const double raw = 1.0 * item.flags.is_done + 1.0 * item.flags.fs_done +
                       2.0 * item.flags.interp_done +
                       6.0 * item.flags.neb_converged;
    s.completion = w * raw / 10.0;
    s.relative_error =
        relative_error(item.barrier_pred_ev, item.barrier_true_ev);
    const std::optional<double> re_de =
        relative_error(item.de_pred_ev, item.de_true_ev);
    const bool full = item.flags.is_done && item.flags.fs_done &&
                      item.flags.interp_done && item.flags.neb_converged;
    if (!(options.couple_accuracy_to_completion && !full)) {
      double raw_acc = 0.0;
      if (item.de_pred_ev.has_value() &&
          !(options.ts_strict_gate && re_de.value_or(0.0) > 0.1))
        raw_acc += 2.0 * ratio_score(*item.de_pred_ev, item.de_true_ev);
      if (item.barrier_pred_ev.has_value() &&
          !(options.ts_strict_gate && s.relative_error.value_or(0.0) > 0.1))
        raw_acc += 8.0 * ratio_score(*item.barrier_pred_ev, item.barrier_true_ev);
      s.accuracy = w * raw_acc / 10.0;
    }
    b.per_item.push_back(std::move(s));
  }
  finish(b);
  return b;
}

BenchmarkReport aggregate_report(const std::vector<ScoreBreakdown>& tasks) {
  if (tasks.empty())
    throw Error(ErrorKind::BadScoreInput, "cannot aggregate an empty report");
  std::set<TaskType> seen;
  BenchmarkReport report;
  for (const auto& task : tasks) {
    if (!seen.insert(task.task_type).second)
      throw Error(ErrorKind::DuplicateTaskType,
                  "more than one breakdown for task type " +
                      to_string(task.task_type));
    report.overall_completion += task.completion_total;
    report.overall_accuracy += task.accuracy_total;
    report.tasks.push_back(task);
  }
  report.overall_completion /= static_cast<double>(tasks.size());
  report.overall_accuracy /= static_cast<double>(tasks.size());
  return report;
}

}  // namespace vaspflow::score
