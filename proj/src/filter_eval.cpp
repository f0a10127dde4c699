#include "taskfilter/filter_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "taskfilter/errors.hpp"

namespace taskfilter {

double filter_log_loss(double y, double t) {
  if (!(y > 0.0 && y < 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "filtered improvement probability must lie in (0,1), got " +
                    format_double(y));
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "holdout improvement probability must lie in [0,1], got " +
                    format_double(t));
  }
  return t * std::log(y) + (1.0 - t) * std::log1p(-y);
}

std::string_view partition_mode_name(PartitionMode mode) {
  return mode == PartitionMode::kRandomSplit ? "random_split" : "by_source";
}

PartitionMode parse_partition_mode(std::string_view name) {
  if (name == "random_split") return PartitionMode::kRandomSplit;
  if (name == "by_source") return PartitionMode::kBySource;
  throw Error(ErrorCode::kConfigError,
              "unknown partition mode '" + std::string(name) + "'");
}

namespace {

// Indices of `k` uniformly chosen elements of [0, n), sorted.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

PartitionPlan sample_partitions(const TaskSet& tasks, PartitionMode mode,
                                std::size_t holdout_size, std::size_t count,
                                std::uint64_t seed,
                                const std::string& train_source) {
  PartitionPlan plan;
  plan.mode = mode;
  plan.seed = seed;
  std::mt19937_64 rng(seed);

  if (holdout_size == 0) {
    throw Error(ErrorCode::kInfeasiblePartition, "holdout size must be >= 1");
  }

  if (mode == PartitionMode::kRandomSplit) {
    if (holdout_size >= tasks.size()) {
      throw Error(ErrorCode::kInfeasiblePartition,
                  "holdout size " + std::to_string(holdout_size) +
                      " leaves no train tasks out of " +
                      std::to_string(tasks.size()));
    }
    for (std::size_t c = 0; c < count; ++c) {
      const auto chosen = sample_indices(tasks.size(), holdout_size, rng);
      std::vector<bool> is_holdout(tasks.size(), false);
      for (std::size_t i : chosen) is_holdout[i] = true;
      Partition p;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        (is_holdout[i] ? p.holdout_ids : p.train_ids).push_back(tasks[i].id);
      }
      plan.partitions.push_back(std::move(p));
    }
    return plan;
  }

  if (train_source.empty()) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "by_source partitioning needs a train source tag");
  }
  std::vector<std::string> train_ids;
  std::vector<std::string> pool;
  for (const auto& t : tasks) {
    (t.source_tag == train_source ? train_ids : pool).push_back(t.id);
  }
  if (train_ids.empty() || pool.empty()) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "by_source partitioning with train tag '" + train_source +
                    "' leaves an empty group (" +
                    std::to_string(train_ids.size()) + " train, " +
                    std::to_string(pool.size()) + " holdout candidates)");
  }
  if (holdout_size > pool.size()) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "holdout size " + std::to_string(holdout_size) + " exceeds the " +
                    std::to_string(pool.size()) + " non-train tasks");
  }
  for (std::size_t c = 0; c < count; ++c) {
    Partition p;
    p.train_ids = train_ids;
    for (std::size_t i : sample_indices(pool.size(), holdout_size, rng)) {
      p.holdout_ids.push_back(pool[i]);
    }
    plan.partitions.push_back(std::move(p));
  }
  return plan;
}

FilterLossRecord eval_filter(const FilterSpec& filter, const TaskSet& train,
                             const TaskSet& holdouts, const Change& change,
                             const RunStore& store, const EvalOptions& options) {
  validate_filter_spec(filter);
  if (filter.kind == FilterKind::kOracleSim &&
      options.access == HoldoutAccess::kDescriptorOnly) {
    throw Error(ErrorCode::kAccessDenied,
                "oracle_sim filter '" + filter.label() +
                    "' cannot be used: holdout tasks are descriptor-only");
  }
  FilterContext ctx;
  ctx.store = &store;
  ctx.baseline_setup = change.baseline_setup;
  ctx.oracle_setups =
      options.oracle_setups.empty() ? store.setups() : options.oracle_setups;

  std::vector<HoldoutView> views;
  if (is_similarity_kind(filter.kind)) {
    views.reserve(holdouts.size());
    const bool needs_oracle = filter.kind == FilterKind::kOracleSim;
    for (const auto& h : holdouts) {
      views.push_back(make_holdout_view(
          h, store, change.baseline_setup, options.access,
          needs_oracle ? std::span<const std::string>(ctx.oracle_setups)
                       : std::span<const std::string>()));
    }
  }
  const TaskSet filtered = apply_filter(filter, train, views, ctx);
  if (filtered.empty()) {
    throw Error(ErrorCode::kEmptyFilterOutput,
                "filter '" + filter.label() + "' selected no tasks");
  }
  FilterLossRecord rec;
  rec.filter = filter.label();
  rec.y = eval_system_change(filtered, change, store, options.eps).aggregate;
  rec.t = eval_system_change(holdouts, change, store, options.eps).aggregate;
  rec.log_loss = filter_log_loss(rec.y, rec.t);
  rec.filtered_count = filtered.size();
  return rec;
}

std::uint64_t partition_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

std::vector<FilterLossRecord> eval_filter_over_plan(
    const FilterSpec& filter, const TaskSet& tasks, const PartitionPlan& plan,
    const Change& change, const RunStore& store, const EvalOptions& options) {
  std::vector<FilterLossRecord> out;
  out.reserve(plan.partitions.size());
  for (std::size_t k = 0; k < plan.partitions.size(); ++k) {
    const auto& part = plan.partitions[k];
    FilterSpec spec = filter;
    if (spec.kind == FilterKind::kRandom) spec.seed = partition_seed(filter.seed, k);
    auto rec = eval_filter(spec, tasks.subset(part.train_ids),
                           tasks.subset(part.holdout_ids), change, store, options);
    rec.partition_index = k;
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<WelchResult> welch_t_test(std::span<const double> a,
                                        std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return std::nullopt;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = sample_variance(a, ma) / na;
  const double vb = sample_variance(b, mb) / nb;
  WelchResult r;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.dof = na + nb - 2.0;
    if (ma == mb) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = ma > mb ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  boost::math::students_t dist(r.dof);
  r.p_value = 2.0 * boost::math::cdf(
                        boost::math::complement(dist, std::fabs(r.t_statistic)));
  r.p_value = std::min(r.p_value, 1.0);
  return r;
}

double mean_log_loss(std::span<const FilterLossRecord> records) {
  if (records.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& r : records) s += r.log_loss;
  return s / static_cast<double>(records.size());
}

ContrastSummary summarize_contrast(std::string new_filter,
                                   std::string baseline_filter,
                                   std::vector<FilterLossRecord> new_records,
                                   std::vector<FilterLossRecord> baseline_records) {
  ContrastSummary s;
  s.new_filter = std::move(new_filter);
  s.baseline_filter = std::move(baseline_filter);
  s.new_records = std::move(new_records);
  s.baseline_records = std::move(baseline_records);
  s.mean_new = mean_log_loss(s.new_records);
  s.mean_baseline = mean_log_loss(s.baseline_records);
  s.mean_diff = s.mean_new - s.mean_baseline;
  s.cross_entropy_new = -s.mean_new;
  s.cross_entropy_baseline = -s.mean_baseline;
  std::vector<double> a, b;
  for (const auto& r : s.new_records) a.push_back(r.log_loss);
  for (const auto& r : s.baseline_records) b.push_back(r.log_loss);
  if (auto w = welch_t_test(a, b)) {
    s.p_value = w->p_value;
    s.significant = w->p_value < kSignificanceLevel;
  }
  return s;
}

ContrastSummary contrast_filters(const FilterSpec& new_filter,
                                 const FilterSpec& baseline_filter,
                                 const Change& change, const PartitionPlan& plan,
                                 const TaskSet& tasks, const RunStore& store,
                                 const EvalOptions& options) {
  auto new_records =
      eval_filter_over_plan(new_filter, tasks, plan, change, store, options);
  auto base_records =
      eval_filter_over_plan(baseline_filter, tasks, plan, change, store, options);
  return summarize_contrast(new_filter.label(), baseline_filter.label(),
                            std::move(new_records), std::move(base_records));
}

void write_loss_records(std::ostream& out,
                        std::span<const FilterLossRecord> records, bool header) {
  if (header) out << "partition,filter,y,t,log_loss\n";
  for (const auto& r : records) {
    out << r.partition_index << ',' << r.filter << ',' << format_double(r.y)
        << ',' << format_double(r.t) << ',' << format_double(r.log_loss) << '\n';
  }
}

}  // namespace taskfilter
