#pragma once

// Filters map (train tasks, holdout information) to a subset of the train
// tasks: top-n by a similarity metric, a seeded random subset, all tasks, and
// the voting filter that combines per-holdout selections.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskfilter/similarity.hpp"
#include "taskfilter/task_model.hpp"

namespace taskfilter {

enum class FilterKind { kRandom, kDescriptorSim, kPerformanceSim, kOracleSim, kAll };

std::string_view filter_kind_name(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);
bool is_similarity_kind(FilterKind kind);

struct FilterSpec {
  std::string name;  // report label; defaults to the kind name
  FilterKind kind = FilterKind::kAll;
  std::size_t length = 1;
  // Per-holdout selection size for the voting filter; defaults to `length`.
  std::optional<std::size_t> inner_length;
  std::vector<std::string> descriptor_keys;
  Correlation corr = Correlation::kSpearman;
  std::uint64_t seed = 0;
  SurrogateOptions surrogate;

  std::string label() const;
};

// Throws ConfigError when the spec cannot describe a valid filter.
void validate_filter_spec(const FilterSpec& spec);

enum class HoldoutAccess { kDescriptorOnly, kFull };

// Everything a filter may know about one holdout task: its task descriptors,
// its runs on the baseline setup, and (with full access only) its per-setup
// mean qualities for the oracle metric.
struct HoldoutView {
  Task task;
  std::vector<RunRecord> baseline_runs;
  std::optional<std::vector<double>> oracle_means;
};

// With kFull access and non-empty `oracle_setups`, oracle means are filled
// in; missing runs then raise NoRuns.
HoldoutView make_holdout_view(const Task& holdout, const RunStore& store,
                              const std::string& baseline_setup,
                              HoldoutAccess access,
                              std::span<const std::string> oracle_setups = {});

// Train-side data the similarity metrics read.
struct FilterContext {
  const RunStore* store = nullptr;
  std::string baseline_setup;
  std::vector<std::string> oracle_setups;
};

SimilarityVector compute_similarity(const FilterSpec& spec, const TaskSet& train,
                                    const HoldoutView& holdout,
                                    const FilterContext& ctx);

// Ids of the `n` most similar tasks; ties go to the smaller id.
std::vector<std::string> top_by_similarity(const SimilarityVector& sims,
                                           std::size_t n);

TaskSet apply_sim_filter(const FilterSpec& spec, const TaskSet& train,
                         const HoldoutView& holdout, const FilterContext& ctx);

// Uniform sample without replacement of min(length, |train|) tasks, in
// train-set order. Throws EmptyTrainSet.
TaskSet apply_random_filter(const FilterSpec& spec, const TaskSet& train);

TaskSet apply_all_filter(const TaskSet& train);

// One vote per appearance in a per-holdout selection; returns the top
// `length` by votes, breaking ties by summed similarity across holdouts and
// then by ascending id.
TaskSet apply_voting_filter(const FilterSpec& inner, const TaskSet& train,
                            std::span<const HoldoutView> holdouts,
                            std::size_t length, const FilterContext& ctx);

// Dispatches on spec.kind; similarity kinds go through the voting filter.
TaskSet apply_filter(const FilterSpec& spec, const TaskSet& train,
                     std::span<const HoldoutView> holdouts,
                     const FilterContext& ctx);

}  // namespace taskfilter
