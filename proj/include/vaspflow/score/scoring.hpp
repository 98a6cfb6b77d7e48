#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vaspflow/score/soap.hpp"
#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::score {

enum class TaskType { SR, BS, AE, TS };

std::string to_string(TaskType t);

/// Agreement between two scalar labels as min(|a|, |b|) / max(|a|, |b|).
/// Both zero gives 1.0, exactly one zero gives 0.0. Symmetric, scale
/// invariant, in [0, 1]. Throws BadScoreInput on non-finite input.
double ratio_score(double pred, double truth);

struct PerItemScore {
  std::string id;
  double completion = 0.0;
  double accuracy = 0.0;
  // |pred - true| / |true| for the task's headline scalar (BS gap, AE
  // adsorption energy, TS barrier), when a prediction and a nonzero
  // reference both exist.
  std::optional<double> relative_error;
};

struct ScoreBreakdown {
  TaskType task_type = TaskType::SR;
  std::vector<PerItemScore> per_item;
  double completion_total = 0.0;  // 0..100
  double accuracy_total = 0.0;    // 0..100
};

struct ScoringOptions {
  // When set, a transition-state accuracy component whose relative error
  // exceeds 10% is zeroed instead of earning its ratio score.
  bool ts_strict_gate = false;
  // When set, accuracy is only awarded on items whose completion is full.
  bool couple_accuracy_to_completion = false;
};

/// One relaxation task: completion for a converged run, accuracy from the
/// SOAP similarity between predicted and reference structures. The two
/// levels are scored independently unless coupling is requested.
struct SrItem {
  std::string id;
  bool converged = false;
  std::optional<vasp::CrystalStructure> predicted;
  vasp::CrystalStructure reference;
};

/// One band-structure task: accuracy from the ratio of band gaps.
struct BsItem {
  std::string id;
  bool completed = false;
  std::optional<double> gap_pred_ev;
  double gap_true_ev = 0.0;
};

/// Stage flags for an adsorption-energy task, weighted 2 : 3 : 5.
struct AeCompletionFlags {
  bool co_relaxed = false;
  bool surface_relaxed = false;
  bool adsorbed_relaxed = false;
};

struct AeItem {
  std::string id;
  AeCompletionFlags flags;
  std::optional<double> e_ads_pred_ev;
  double e_ads_true_ev = 0.0;
};

/// Stage flags for a transition-state task, weighted 1 : 1 : 2 : 6.
struct TsCompletionFlags {
  bool is_done = false;
  bool fs_done = false;
  bool interp_done = false;
  bool neb_converged = false;
};

/// Accuracy splits 2 : 8 between the reaction energy and the barrier.
struct TsItem {
  std::string id;
  TsCompletionFlags flags;
  std::optional<double> de_pred_ev;
  double de_true_ev = 0.0;
  std::optional<double> barrier_pred_ev;
  double barrier_true_ev = 0.0;
};

/// Each scorer distributes 100 completion points and 100 accuracy points
/// uniformly over its items (weight 100 / n per item) and scales an item's
/// raw stage credit by the item weight, so toy subsets score on the same
/// 0-100 scale as the full benchmark. Missing predictions earn zero
/// accuracy. Throws BadScoreInput on an empty item list.
ScoreBreakdown score_sr(const std::vector<SrItem>& items, const SoapParams& soap,
                        const ScoringOptions& options = {});
ScoreBreakdown score_bs(const std::vector<BsItem>& items,
                        const ScoringOptions& options = {});
ScoreBreakdown score_ae(const std::vector<AeItem>& items,
                        const ScoringOptions& options = {});
ScoreBreakdown score_ts(const std::vector<TsItem>& items,
                        const ScoringOptions& options = {});

struct BenchmarkReport {
  double overall_completion = 0.0;
  double overall_accuracy = 0.0;
  std::vector<ScoreBreakdown> tasks;
};

/// Unweighted mean of the per-task totals. At most one breakdown per task
/// type (DuplicateTaskType); the list must be nonempty (BadScoreInput).
BenchmarkReport aggregate_report(const std::vector<ScoreBreakdown>& tasks);

}  // namespace vaspflow::score
