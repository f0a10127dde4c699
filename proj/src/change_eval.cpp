#include "taskfilter/change_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taskfilter/errors.hpp"

namespace taskfilter {

double improvement_probability(std::span<const double> baseline_q,
                               std::span<const double> modified_q) {
  if (baseline_q.empty() || modified_q.empty()) {
    throw Error(ErrorCode::kEmptyQualities,
                "improvement probability needs non-empty quality lists");
  }
  std::vector<double> sorted(baseline_q.begin(), baseline_q.end());
  std::sort(sorted.begin(), sorted.end());
  // For each modified quality, the baselines strictly below it.
  std::uint64_t wins = 0;
  for (double m : modified_q) {
    wins += static_cast<std::uint64_t>(
        std::lower_bound(sorted.begin(), sorted.end(), m) - sorted.begin());
  }
  const double pairs =
      static_cast<double>(baseline_q.size()) * static_cast<double>(modified_q.size());
  return static_cast<double>(wins) / pairs;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "logit requires p in (0,1), got " + format_double(p));
  }
  return std::log(p) - std::log1p(-p);
}

double expit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Epsilon Epsilon::fixed(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw Error(ErrorCode::kDomainError,
                "clipping epsilon must lie in (0, 0.5), got " + format_double(eps));
  }
  return Epsilon(eps);
}

double Epsilon::for_pairs(std::size_t pair_count) const {
  if (value_) return *value_;
  return 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(pair_count, 1)));
}

double aggregate_probabilities(std::span<const std::string> task_ids,
                               std::span<const double> clipped_probs) {
  if (task_ids.size() != clipped_probs.size()) {
    throw Error(ErrorCode::kLengthMismatch, "task ids and probabilities differ in length");
  }
  if (task_ids.empty()) {
    throw Error(ErrorCode::kEmptyQualities, "cannot aggregate over zero tasks");
  }
  std::vector<std::size_t> order(task_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return task_ids[a] < task_ids[b];
  });
  double sum = 0.0;
  for (std::size_t i : order) sum += logit(clipped_probs[i]);
  return expit(sum / static_cast<double>(task_ids.size()));
}

ImprovementReport eval_system_change(const TaskSet& tasks, const Change& change,
                                     const RunStore& store, Epsilon eps) {
  if (tasks.empty()) {
    throw Error(ErrorCode::kEmptyQualities,
                "cannot evaluate a change over zero tasks");
  }
  ImprovementReport report;
  report.eps_auto = eps.is_auto();
  report.per_task.reserve(tasks.size());
  std::vector<std::string> ids;
  std::vector<double> clipped;
  for (const auto& task : tasks) {
    const auto base = store.qualities(task.id, change.baseline_setup);
    const auto mod = store.qualities(task.id, change.modified_setup);
    const double p = improvement_probability(base, mod);
    const double e = eps.for_pairs(base.size() * mod.size());
    const double c = std::clamp(p, e, 1.0 - e);
    report.per_task.emplace_back(task.id, c);
    report.raw_per_task.push_back(p);
    report.eps_used.push_back(e);
    ids.push_back(task.id);
    clipped.push_back(c);
  }
  report.aggregate = aggregate_probabilities(ids, clipped);
  return report;
}

}  // namespace taskfilter
