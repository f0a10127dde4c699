#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taskfilter/task_model.hpp"

namespace taskfilter {

// Fraction of (baseline, modified) pairs where modified > baseline. Ties do
// not count as improvements. Throws EmptyQualities for empty inputs.
double improvement_probability(std::span<const double> baseline_q,
                               std::span<const double> modified_q);

// ln(p / (1 - p)); throws DomainError unless 0 < p < 1.
double logit(double p);
double expit(double x);

// Clipping epsilon for per-task improvement probabilities. The automatic
// policy uses 1 / (2 * P) where P is the number of run pairs for the task.
class Epsilon {
 public:
  static Epsilon automatic() { return Epsilon(std::nullopt); }
  // Throws DomainError unless 0 < eps < 0.5.
  static Epsilon fixed(double eps);

  bool is_auto() const noexcept { return !value_.has_value(); }
  double for_pairs(std::size_t pair_count) const;

 private:
  explicit Epsilon(std::optional<double> v) : value_(v) {}
  std::optional<double> value_;
};

struct ImprovementReport {
  // Clipped per-task probabilities in task-set order.
  std::vector<std::pair<std::string, double>> per_task;
  // Unclipped per-task probabilities, same order.
  std::vector<double> raw_per_task;
  // Per-task epsilon actually applied, same order.
  std::vector<double> eps_used;
  double aggregate = 0.5;
  bool eps_auto = true;
};

// expit of the mean over tasks of logit(clip(probImproved)). The sum runs in
// ascending task-id order so the result is bit-identical under any
// permutation of the task set. Throws NoRuns naming the task and setup when a
// task lacks runs, and EmptyQualities for an empty task set.
ImprovementReport eval_system_change(const TaskSet& tasks, const Change& change,
                                     const RunStore& store,
                                     Epsilon eps = Epsilon::automatic());

// Same aggregation applied to already-computed per-task probabilities.
double aggregate_probabilities(std::span<const std::string> task_ids,
                               std::span<const double> clipped_probs);

}  // namespace taskfilter
