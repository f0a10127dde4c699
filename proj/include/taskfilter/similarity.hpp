#pragma once

// Similarity metrics scoring how relevant each train task is to one holdout
// task. Higher values mean more similar.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskfilter/task_model.hpp"

namespace taskfilter {

enum class Correlation { kSpearman, kPearson };

std::string_view correlation_name(Correlation c);
Correlation parse_correlation(std::string_view name);

// Pearson product-moment correlation. Zero-variance input gives 0.
// Throws LengthMismatch for unequal lengths, and for lengths below 2.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks, tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average-tie ranks.
double spearman(std::span<const double> x, std::span<const double> y);

double correlate(Correlation method, std::span<const double> x,
                 std::span<const double> y);

struct SimilarityVector {
  std::string metric_name;
  // One entry per train task, in train-set order.
  std::vector<std::pair<std::string, double>> values;

  double at(const std::string& task_id) const;
};

// Inverse euclidean distance between z-scored descriptor vectors. Each key is
// z-scored over train plus the holdout; a key with zero variance adds nothing
// to the distance.
inline constexpr double kDistanceOffset = 1e-12;

SimilarityVector descriptor_similarity(const TaskSet& train,
                                       const Task& holdout,
                                       std::span<const std::string> keys);

struct SurrogatePoint {
  std::vector<double> hyperparams;
  double quality = 0.0;
};

struct SurrogateOptions {
  std::size_t k = 5;
  // Defaults to the median pairwise distance between training configs.
  std::optional<double> bandwidth;
};

// Distance-weighted k-nearest-neighbour regressor over hyperparameter
// vectors with Gaussian weights exp(-d^2 / bandwidth^2). A query that
// coincides with training points returns their mean quality. Predictions are
// convex combinations of training qualities.
class Surrogate {
 public:
  // Throws EmptyTrainingSet for no points; k is truncated to the point count.
  static Surrogate fit(std::vector<SurrogatePoint> points,
                       const SurrogateOptions& options = {});

  double predict(std::span<const double> hyperparams) const;

  std::size_t k() const noexcept { return k_; }
  double bandwidth() const noexcept { return bandwidth_; }
  const std::vector<SurrogatePoint>& points() const noexcept { return points_; }

 private:
  std::vector<SurrogatePoint> points_;
  std::size_t k_ = 1;
  double bandwidth_ = 1.0;
};

// Median of all pairwise euclidean distances; 1 when there are fewer than two
// points or the median is 0.
double median_pairwise_distance(std::span<const SurrogatePoint> points);

Surrogate fit_surrogate(std::span<const RunRecord> runs,
                        const SurrogateOptions& options = {});

// Surrogate-based similarity from the holdout's baseline runs only. For each
// train task a surrogate fit on that task's baseline runs predicts quality
// at the holdout's configs; the similarity is the correlation with the
// holdout's observed qualities. Needs at least 3 holdout runs.
SimilarityVector performance_similarity(
    const TaskSet& train, std::span<const RunRecord> holdout_baseline_runs,
    const std::string& baseline_setup, const RunStore& store,
    Correlation corr = Correlation::kSpearman,
    const SurrogateOptions& options = {});

SimilarityVector performance_descriptor_similarity(
    const TaskSet& train, const std::string& holdout_id,
    const std::string& baseline_setup, const RunStore& store,
    Correlation corr = Correlation::kSpearman,
    const SurrogateOptions& options = {});

// Mean quality of a task under each listed setup. Throws NoRuns.
std::vector<double> per_setup_means(const std::string& task_id,
                                    std::span<const std::string> setups,
                                    const RunStore& store);

// Correlation of per-setup mean qualities between each train task and the
// holdout. Needs at least 3 setups.
SimilarityVector oracle_similarity_from_means(
    const TaskSet& train, std::span<const double> holdout_means,
    std::span<const std::string> setups, const RunStore& store,
    Correlation corr = Correlation::kSpearman);

SimilarityVector oracle_similarity(const TaskSet& train,
                                   const std::string& holdout_id,
                                   std::span<const std::string> setups,
                                   const RunStore& store,
                                   Correlation corr = Correlation::kSpearman);

}  // namespace taskfilter
