#include "taskfilter/filters.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "taskfilter/errors.hpp"

namespace taskfilter {

std::string_view filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::kRandom: return "random";
    case FilterKind::kDescriptorSim: return "descriptor_sim";
    case FilterKind::kPerformanceSim: return "performance_sim";
    case FilterKind::kOracleSim: return "oracle_sim";
    case FilterKind::kAll: return "all";
  }
  return "unknown";
}

FilterKind parse_filter_kind(std::string_view name) {
  for (auto k : {FilterKind::kRandom, FilterKind::kDescriptorSim,
                 FilterKind::kPerformanceSim, FilterKind::kOracleSim,
                 FilterKind::kAll}) {
    if (filter_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kConfigError,
              "unknown filter kind '" + std::string(name) + "'");
}

bool is_similarity_kind(FilterKind kind) {
  return kind == FilterKind::kDescriptorSim ||
         kind == FilterKind::kPerformanceSim || kind == FilterKind::kOracleSim;
}

std::string FilterSpec::label() const {
  return name.empty() ? std::string(filter_kind_name(kind)) : name;
}

void validate_filter_spec(const FilterSpec& spec) {
  if (spec.length == 0) {
    throw Error(ErrorCode::kConfigError,
                "filter '" + spec.label() + "' length must be >= 1");
  }
  if (spec.inner_length && *spec.inner_length == 0) {
    throw Error(ErrorCode::kConfigError,
                "filter '" + spec.label() + "' inner_length must be >= 1");
  }
  if (spec.kind == FilterKind::kDescriptorSim && spec.descriptor_keys.empty()) {
    throw Error(ErrorCode::kConfigError,
                "filter '" + spec.label() + "' needs descriptor_keys");
  }
  if (spec.surrogate.k == 0) {
    throw Error(ErrorCode::kConfigError,
                "filter '" + spec.label() + "' surrogate k must be >= 1");
  }
}

HoldoutView make_holdout_view(const Task& holdout, const RunStore& store,
                              const std::string& baseline_setup,
                              HoldoutAccess access,
                              std::span<const std::string> oracle_setups) {
  HoldoutView view;
  view.task = holdout;
  if (store.has(holdout.id, baseline_setup)) {
    view.baseline_runs = store.runs(holdout.id, baseline_setup);
  }
  if (access == HoldoutAccess::kFull && !oracle_setups.empty()) {
    view.oracle_means = per_setup_means(holdout.id, oracle_setups, store);
  }
  return view;
}

SimilarityVector compute_similarity(const FilterSpec& spec, const TaskSet& train,
                                    const HoldoutView& holdout,
                                    const FilterContext& ctx) {
  switch (spec.kind) {
    case FilterKind::kDescriptorSim:
      return descriptor_similarity(train, holdout.task, spec.descriptor_keys);
    case FilterKind::kPerformanceSim:
      return performance_similarity(train, holdout.baseline_runs,
                                    ctx.baseline_setup, *ctx.store, spec.corr,
                                    spec.surrogate);
    case FilterKind::kOracleSim:
      if (!holdout.oracle_means) {
        throw Error(ErrorCode::kAccessDenied,
                    "oracle_sim needs per-setup qualities of holdout task '" +
                        holdout.task.id +
                        "', which a descriptor-only holdout view does not "
                        "expose");
      }
      return oracle_similarity_from_means(train, *holdout.oracle_means,
                                          ctx.oracle_setups, *ctx.store,
                                          spec.corr);
    default:
      throw Error(ErrorCode::kConfigError,
                  "filter kind '" + std::string(filter_kind_name(spec.kind)) +
                      "' has no similarity metric");
  }
}

std::vector<std::string> top_by_similarity(const SimilarityVector& sims,
                                           std::size_t n) {
  std::vector<std::size_t> order(sims.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& [ia, sa] = sims.values[a];
    const auto& [ib, sb] = sims.values[b];
    if (sa != sb) return sa > sb;
    return ia < ib;
  });
  n = std::min(n, order.size());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sims.values[order[i]].first);
  return out;
}

TaskSet apply_sim_filter(const FilterSpec& spec, const TaskSet& train,
                         const HoldoutView& holdout, const FilterContext& ctx) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "cannot filter an empty train set");
  }
  const auto sims = compute_similarity(spec, train, holdout, ctx);
  const auto ids = top_by_similarity(sims, spec.length);
  return train.subset(ids);
}

TaskSet apply_random_filter(const FilterSpec& spec, const TaskSet& train) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "cannot filter an empty train set");
  }
  const std::size_t n = std::min(spec.length, train.size());
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(spec.seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  TaskSet out;
  for (std::size_t i : idx) out.add(train[i]);
  return out;
}

TaskSet apply_all_filter(const TaskSet& train) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "cannot filter an empty train set");
  }
  return train;
}

TaskSet apply_voting_filter(const FilterSpec& inner, const TaskSet& train,
                            std::span<const HoldoutView> holdouts,
                            std::size_t length, const FilterContext& ctx) {
  if (train.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "cannot filter an empty train set");
  }
  if (holdouts.empty()) {
    throw Error(ErrorCode::kConfigError, "voting filter needs >= 1 holdout");
  }
  const std::size_t inner_n = inner.inner_length.value_or(inner.length);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < train.size(); ++i) pos[train[i].id] = i;

  std::vector<std::size_t> votes(train.size(), 0);
  std::vector<double> sim_sum(train.size(), 0.0);
  for (const auto& holdout : holdouts) {
    const auto sims = compute_similarity(inner, train, holdout, ctx);
    for (std::size_t i = 0; i < sims.values.size(); ++i) {
      sim_sum[i] += sims.values[i].second;
    }
    for (const auto& id : top_by_similarity(sims, inner_n)) ++votes[pos.at(id)];
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    if (sim_sum[a] != sim_sum[b]) return sim_sum[a] > sim_sum[b];
    return train[a].id < train[b].id;
  });
  order.resize(std::min(length, order.size()));
  TaskSet out;
  for (std::size_t i : order) out.add(train[i]);
  return out;
}

TaskSet apply_filter(const FilterSpec& spec, const TaskSet& train,
                     std::span<const HoldoutView> holdouts,
                     const FilterContext& ctx) {
  switch (spec.kind) {
    case FilterKind::kRandom:
      return apply_random_filter(spec, train);
    case FilterKind::kAll:
      return apply_all_filter(train);
    default:
      return apply_voting_filter(spec, train, holdouts, spec.length, ctx);
  }
}

}  // namespace taskfilter
