#pragma once

// Scoring filters: the log-loss between the improvement probability on the
// filtered tasks (y) and on the holdout tasks (t), train/holdout partition
// sampling, and contrasts between two filters over many partitions.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskfilter/change_eval.hpp"
#include "taskfilter/filters.hpp"
#include "taskfilter/task_model.hpp"

namespace taskfilter {

// t*ln(y) + (1-t)*ln(1-y). Never positive; larger is better, and for fixed t
// the maximum is at y = t. Throws DomainError unless y in (0,1), t in [0,1].
double filter_log_loss(double y, double t);

struct FilterLossRecord {
  std::size_t partition_index = 0;
  std::string filter;
  double y = 0.5;
  double t = 0.5;
  double log_loss = 0.0;
  std::size_t filtered_count = 0;
};

enum class PartitionMode { kRandomSplit, kBySource };

std::string_view partition_mode_name(PartitionMode mode);
PartitionMode parse_partition_mode(std::string_view name);

struct Partition {
  std::vector<std::string> train_ids;
  std::vector<std::string> holdout_ids;
};

struct PartitionPlan {
  std::vector<Partition> partitions;
  PartitionMode mode = PartitionMode::kRandomSplit;
  std::uint64_t seed = 0;
};

// random_split: `count` independent uniform splits with `holdout_size`
// holdouts and the rest as train. by_source: train is every task tagged
// `train_source`; holdouts are `holdout_size` tasks subsampled from the other
// tags. Ids keep task-set order. Throws InfeasiblePartition.
PartitionPlan sample_partitions(const TaskSet& tasks, PartitionMode mode,
                                std::size_t holdout_size, std::size_t count,
                                std::uint64_t seed,
                                const std::string& train_source = {});

struct EvalOptions {
  HoldoutAccess access = HoldoutAccess::kFull;
  // Setups for oracle_sim; empty means every setup in the store.
  std::vector<std::string> oracle_setups;
  Epsilon eps = Epsilon::automatic();
};

// Throws EmptyFilterOutput, AccessDenied (oracle_sim on descriptor-only
// holdouts), and whatever the metric or change evaluation raises.
FilterLossRecord eval_filter(const FilterSpec& filter, const TaskSet& train,
                             const TaskSet& holdouts, const Change& change,
                             const RunStore& store,
                             const EvalOptions& options = {});

// Seed for a random filter on partition `index`, derived from the spec seed.
std::uint64_t partition_seed(std::uint64_t seed, std::size_t index);

// eval_filter on every partition of the plan, in plan order. Random filters
// get a per-partition seed from partition_seed().
std::vector<FilterLossRecord> eval_filter_over_plan(
    const FilterSpec& filter, const TaskSet& tasks, const PartitionPlan& plan,
    const Change& change, const RunStore& store,
    const EvalOptions& options = {});

struct WelchResult {
  double t_statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // two-sided
};

// Welch's unequal-variance t-test; nullopt when either sample has fewer than
// two values. Two constant samples give p = 1 when their means agree and
// p = 0 otherwise.
std::optional<WelchResult> welch_t_test(std::span<const double> a,
                                        std::span<const double> b);

inline constexpr double kSignificanceLevel = 0.05;

struct ContrastSummary {
  std::string new_filter;
  std::string baseline_filter;
  std::vector<FilterLossRecord> new_records;
  std::vector<FilterLossRecord> baseline_records;
  double mean_new = 0.0;
  double mean_baseline = 0.0;
  double mean_diff = 0.0;  // mean_new - mean_baseline; > 0 favours new
  double cross_entropy_new = 0.0;
  double cross_entropy_baseline = 0.0;
  std::optional<double> p_value;
  bool significant = false;
};

double mean_log_loss(std::span<const FilterLossRecord> records);

ContrastSummary summarize_contrast(std::string new_filter,
                                   std::string baseline_filter,
                                   std::vector<FilterLossRecord> new_records,
                                   std::vector<FilterLossRecord> baseline_records);

ContrastSummary contrast_filters(const FilterSpec& new_filter,
                                 const FilterSpec& baseline_filter,
                                 const Change& change, const PartitionPlan& plan,
                                 const TaskSet& tasks, const RunStore& store,
                                 const EvalOptions& options = {});

// CSV with columns partition,filter,y,t,log_loss.
void write_loss_records(std::ostream& out,
                        std::span<const FilterLossRecord> records,
                        bool header = true);

}  // namespace taskfilter
