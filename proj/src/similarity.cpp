#include "taskfilter/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taskfilter/errors.hpp"

namespace taskfilter {

std::string_view correlation_name(Correlation c) {
  return c == Correlation::kSpearman ? "spearman" : "pearson";
}

Correlation parse_correlation(std::string_view name) {
  if (name == "spearman") return Correlation::kSpearman;
  if (name == "pearson") return Correlation::kPearson;
  throw Error(ErrorCode::kConfigError,
              "unknown correlation '" + std::string(name) + "'");
}

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "correlation inputs have lengths " + std::to_string(x.size()) +
                    " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch,
                "correlation needs at least 2 points");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) ranks[order[m]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double correlate(Correlation method, std::span<const double> x,
                 std::span<const double> y) {
  return method == Correlation::kSpearman ? spearman(x, y) : pearson(x, y);
}

double SimilarityVector::at(const std::string& task_id) const {
  for (const auto& [id, v] : values) {
    if (id == task_id) return v;
  }
  throw Error(ErrorCode::kUnknownTask,
              "no similarity for task '" + task_id + "'");
}

// ------------------------------------------------------ descriptor metric

SimilarityVector descriptor_similarity(const TaskSet& train,
                                       const Task& holdout,
                                       std::span<const std::string> keys) {
  auto lookup = [](const Task& t, const std::string& key) {
    auto it = t.descriptors.find(key);
    if (it == t.descriptors.end()) {
      throw Error(ErrorCode::kMissingDescriptor,
                  "task '" + t.id + "' lacks descriptor '" + key + "'");
    }
    return it->second;
  };

  const std::size_t n = train.size();
  // column-major: scaled[k][i] for train i, holdout at index n
  std::vector<std::vector<double>> scaled(keys.size(),
                                          std::vector<double>(n + 1));
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto& col = scaled[k];
    for (std::size_t i = 0; i < n; ++i) col[i] = lookup(train[i], keys[k]);
    col[n] = lookup(holdout, keys[k]);
    const double mean =
        std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n + 1);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n + 1);
    const double sd = std::sqrt(var);
    for (double& v : col) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }

  SimilarityVector out;
  out.metric_name = "descriptor";
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (const auto& col : scaled) {
      const double d = col[i] - col[n];
      d2 += d * d;
    }
    out.values.emplace_back(train[i].id, 1.0 / (std::sqrt(d2) + kDistanceOffset));
  }
  return out;
}

// --------------------------------------------------------------- surrogate

double median_pairwise_distance(std::span<const SurrogatePoint> points) {
  if (points.size() < 2) return 1.0;
  std::vector<double> dists;
  dists.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      dists.push_back(std::sqrt(
          squared_distance(points[i].hyperparams, points[j].hyperparams)));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + mid);
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

Surrogate Surrogate::fit(std::vector<SurrogatePoint> points,
                         const SurrogateOptions& options) {
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "surrogate needs at least one run");
  }
  if (options.k == 0) {
    throw Error(ErrorCode::kConfigError, "surrogate k must be >= 1");
  }
  const std::size_t dim = points.front().hyperparams.size();
  for (const auto& p : points) {
    if (p.hyperparams.size() != dim) {
      throw Error(ErrorCode::kArityMismatch,
                  "surrogate training configs differ in dimension");
    }
  }
  Surrogate s;
  s.k_ = std::min(options.k, points.size());
  if (options.bandwidth) {
    if (!(*options.bandwidth > 0.0) || !std::isfinite(*options.bandwidth)) {
      throw Error(ErrorCode::kConfigError, "surrogate bandwidth must be > 0");
    }
    s.bandwidth_ = *options.bandwidth;
  } else {
    s.bandwidth_ = median_pairwise_distance(points);
  }
  s.points_ = std::move(points);
  return s;
}

double Surrogate::predict(std::span<const double> hyperparams) const {
  if (hyperparams.size() != points_.front().hyperparams.size()) {
    throw Error(ErrorCode::kArityMismatch,
                "surrogate query has the wrong dimension");
  }
  std::vector<std::pair<double, std::size_t>> d2(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    d2[i] = {squared_distance(hyperparams, points_[i].hyperparams), i};
  }
  if (std::any_of(d2.begin(), d2.end(),
                  [](const auto& p) { return p.first == 0.0; })) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [dist, i] : d2) {
      if (dist == 0.0) {
        sum += points_[i].quality;
        ++count;
      }
    }
    return sum / static_cast<double>(count);
  }
  std::partial_sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k_),
                    d2.end());
  // Weights are shifted by the nearest distance so they cannot all underflow.
  const double h2 = bandwidth_ * bandwidth_;
  const double nearest = d2.front().first;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < k_; ++j) {
    const double w = std::exp(-(d2[j].first - nearest) / h2);
    num += w * points_[d2[j].second].quality;
    den += w;
  }
  return num / den;
}

Surrogate fit_surrogate(std::span<const RunRecord> runs,
                        const SurrogateOptions& options) {
  std::vector<SurrogatePoint> points;
  points.reserve(runs.size());
  for (const auto& r : runs) points.push_back({r.hyperparams, r.quality});
  return Surrogate::fit(std::move(points), options);
}

// ------------------------------------------------ performance descriptors

SimilarityVector performance_similarity(
    const TaskSet& train, std::span<const RunRecord> holdout_baseline_runs,
    const std::string& baseline_setup, const RunStore& store, Correlation corr,
    const SurrogateOptions& options) {
  if (holdout_baseline_runs.size() < 3) {
    throw Error(ErrorCode::kInsufficientHoldoutRuns,
                "performance similarity needs >= 3 holdout baseline runs, got " +
                    std::to_string(holdout_baseline_runs.size()));
  }
  std::vector<double> actual;
  actual.reserve(holdout_baseline_runs.size());
  for (const auto& r : holdout_baseline_runs) actual.push_back(r.quality);

  SimilarityVector out;
  out.metric_name = "performance";
  out.values.reserve(train.size());
  std::vector<double> predicted(holdout_baseline_runs.size());
  for (const auto& task : train) {
    const auto surrogate =
        fit_surrogate(store.runs(task.id, baseline_setup), options);
    for (std::size_t i = 0; i < holdout_baseline_runs.size(); ++i) {
      predicted[i] = surrogate.predict(holdout_baseline_runs[i].hyperparams);
    }
    out.values.emplace_back(task.id, correlate(corr, predicted, actual));
  }
  return out;
}

SimilarityVector performance_descriptor_similarity(
    const TaskSet& train, const std::string& holdout_id,
    const std::string& baseline_setup, const RunStore& store, Correlation corr,
    const SurrogateOptions& options) {
  const auto& runs = store.has(holdout_id, baseline_setup)
                         ? store.runs(holdout_id, baseline_setup)
                         : std::vector<RunRecord>{};
  return performance_similarity(train, runs, baseline_setup, store, corr,
                                options);
}

// ------------------------------------------------------------------ oracle

std::vector<double> per_setup_means(const std::string& task_id,
                                    std::span<const std::string> setups,
                                    const RunStore& store) {
  std::vector<double> means;
  means.reserve(setups.size());
  for (const auto& setup : setups) {
    const auto q = store.qualities(task_id, setup);
    means.push_back(std::accumulate(q.begin(), q.end(), 0.0) /
                    static_cast<double>(q.size()));
  }
  return means;
}

SimilarityVector oracle_similarity_from_means(
    const TaskSet& train, std::span<const double> holdout_means,
    std::span<const std::string> setups, const RunStore& store,
    Correlation corr) {
  if (setups.size() < 3) {
    throw Error(ErrorCode::kInsufficientSetups,
                "oracle similarity needs >= 3 setups, got " +
                    std::to_string(setups.size()));
  }
  if (holdout_means.size() != setups.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "holdout means do not match the setup list");
  }
  SimilarityVector out;
  out.metric_name = "oracle";
  out.values.reserve(train.size());
  for (const auto& task : train) {
    const auto means = per_setup_means(task.id, setups, store);
    out.values.emplace_back(task.id, correlate(corr, means, holdout_means));
  }
  return out;
}

SimilarityVector oracle_similarity(const TaskSet& train,
                                   const std::string& holdout_id,
                                   std::span<const std::string> setups,
                                   const RunStore& store, Correlation corr) {
  if (setups.size() < 3) {
    throw Error(ErrorCode::kInsufficientSetups,
                "oracle similarity needs >= 3 setups, got " +
                    std::to_string(setups.size()));
  }
  const auto holdout_means = per_setup_means(holdout_id, setups, store);
  return oracle_similarity_from_means(train, holdout_means, setups, store, corr);
}

}  // namespace taskfilter
