#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "taskfilter/errors.hpp"
#include "taskfilter/similarity.hpp"

using namespace taskfilter;
using taskfilter::testing::make_task;

namespace {

std::vector<std::string> ranking(const SimilarityVector& sims) {
  auto v = sims.values;
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> ids;
  for (const auto& [id, s] : v) ids.push_back(id);
  return ids;
}

}  // namespace

TEST_CASE("correlation basics") {
  const std::vector<double> up{1, 2, 3}, down{3, 2, 1};
  CHECK(spearman(up, up) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman(up, down) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson(up, std::vector<double>{5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(pearson(up, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) ==
        std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman with ties matches scipy and the rank oracle") {
  const std::vector<double> x{1, 2, 2, 4}, y{1, 3, 2, 4};
  CHECK(std::fabs(spearman(x, y) - 0.9486832980505139) <= 1e-12);
  CHECK(std::fabs(spearman(x, y) - oracle::spearman(x, y)) <= 1e-12);
  const std::vector<double> a{1, 2, 3, 4.5}, b{2, 1, 4, 3};
  CHECK(std::fabs(pearson(a, b) - 0.5620390115172519) <= 1e-12);
}

TEST_CASE("correlations match the O(n^2) oracle on random vectors with ties") {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> len(2, 25);
  std::uniform_int_distribution<int> level(0, 6);
  std::normal_distribution<double> cont(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    const bool tied = trial % 2 == 0;
    for (int i = 0; i < n; ++i) {
      x[i] = tied ? level(rng) : cont(rng);
      y[i] = tied ? level(rng) : cont(rng);
    }
    REQUIRE(std::fabs(spearman(x, y) - oracle::spearman(x, y)) <= 1e-12);
    REQUIRE(std::fabs(pearson(x, y) - oracle::pearson(x, y)) <= 1e-12);
  }
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(12), y(12), fx(12), gy(12);
    for (int i = 0; i < 12; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      fx[i] = std::exp(x[i]);
      gy[i] = -1.0 / y[i];
    }
    CHECK(std::fabs(spearman(x, y) - spearman(fx, gy)) <= 1e-12);
  }
}

TEST_CASE("descriptor_similarity on a single key") {
  TaskSet train;
  train.add(make_task("a", {{"log10_datapoints", 3.0}}));
  train.add(make_task("b", {{"log10_datapoints", 4.5}}));
  train.add(make_task("c", {{"log10_datapoints", 6.0}}));
  const auto holdout = make_task("h", {{"log10_datapoints", 4.0}});
  const std::vector<std::string> keys{"log10_datapoints"};
  const auto sims = descriptor_similarity(train, holdout, keys);
  CHECK(ranking(sims) == std::vector<std::string>{"b", "a", "c"});

  // Hand z-scores over {3, 4.5, 6, 4}: population sd.
  const double mean = (3.0 + 4.5 + 6.0 + 4.0) / 4.0;
  double ss = 0;
  for (double v : {3.0, 4.5, 6.0, 4.0}) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 4.0);
  CHECK(sims.at("a") == doctest::Approx(1.0 / (1.0 / sd + kDistanceOffset)));
  CHECK(sims.at("b") == doctest::Approx(1.0 / (0.5 / sd + kDistanceOffset)));
}

TEST_CASE("descriptor_similarity edge cases") {
  const std::vector<std::string> keys{"x", "y"};
  SUBCASE("identical descriptors rank first at 1/offset") {
    TaskSet train;
    train.add(make_task("far", {{"x", 10}, {"y", -3}}));
    train.add(make_task("same", {{"x", 1}, {"y", 2}}));
    const auto sims = descriptor_similarity(train, make_task("h", {{"x", 1}, {"y", 2}}), keys);
    CHECK(sims.at("same") == 1.0 / kDistanceOffset);
    CHECK(ranking(sims).front() == "same");
  }
  SUBCASE("zero-variance key contributes nothing") {
    TaskSet train;
    train.add(make_task("a", {{"x", 1}, {"y", 7}}));
    train.add(make_task("b", {{"x", 3}, {"y", 7}}));
    const auto both = descriptor_similarity(train, make_task("h", {{"x", 2.5}, {"y", 7}}), keys);
    const std::vector<std::string> only_x{"x"};
    const auto single =
        descriptor_similarity(train, make_task("h", {{"x", 2.5}, {"y", 7}}), only_x);
    CHECK(both.at("a") == single.at("a"));
    CHECK(both.at("b") == single.at("b"));
    for (const auto& [id, s] : both.values) CHECK(std::isfinite(s));
  }
  SUBCASE("missing key") {
    TaskSet train;
    train.add(make_task("a", {{"x", 1}}));
    try {
      descriptor_similarity(train, make_task("h", {{"x", 1}, {"y", 2}}), keys);
      FAIL("expected MissingDescriptor");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingDescriptor);
      CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }
  }
}

TEST_CASE("descriptor_similarity ranking survives affine rescaling of a column") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01(0.0, 1.0);
  const std::vector<std::string> keys{"x", "y"};
  for (int trial = 0; trial < 20; ++trial) {
    TaskSet train, scaled;
    for (int i = 0; i < 10; ++i) {
      const double x = n01(rng), y = n01(rng);
      const std::string id = "t" + std::to_string(i);
      train.add(make_task(id, {{"x", x}, {"y", y}}));
      scaled.add(make_task(id, {{"x", 250.0 * x - 17.0}, {"y", y}}));
    }
    const double hx = n01(rng), hy = n01(rng);
    const auto a = descriptor_similarity(train, make_task("h", {{"x", hx}, {"y", hy}}), keys);
    const auto b = descriptor_similarity(
        scaled, make_task("h", {{"x", 250.0 * hx - 17.0}, {"y", hy}}), keys);
    CHECK(ranking(a) == ranking(b));
  }
}

TEST_CASE("surrogate predictions") {
  SUBCASE("single record predicts its quality everywhere") {
    auto s = Surrogate::fit({{{0.2, 0.3}, 0.8}});
    CHECK(s.predict(std::vector<double>{0.9, 0.1}) == 0.8);
    CHECK(s.k() == 1);
  }
  SUBCASE("exact match wins") {
    auto s = Surrogate::fit({{{0.0}, 0.2}, {{0.5}, 0.6}, {{1.0}, 0.9}}, {3, std::nullopt});
    CHECK(s.predict(std::vector<double>{0.5}) == 0.6);
  }
  SUBCASE("coincident points average") {
    auto s = Surrogate::fit({{{0.5}, 0.4}, {{0.5}, 0.8}, {{0.9}, 0.1}});
    CHECK(s.predict(std::vector<double>{0.5}) == doctest::Approx(0.6).epsilon(1e-15));
  }
  SUBCASE("two equidistant points weigh equally") {
    auto s = Surrogate::fit({{{0.0}, 0.4}, {{1.0}, 0.8}}, {2, 0.7});
    CHECK(std::fabs(s.predict(std::vector<double>{0.5}) - 0.6) <= 1e-15);
  }
  SUBCASE("hand-computed gaussian weights") {
    auto s = Surrogate::fit({{{0.0}, 0.2}, {{1.0}, 0.9}, {{3.0}, 0.5}}, {2, 1.0});
    const double w0 = std::exp(-0.25 * 0.25), w1 = std::exp(-0.75 * 0.75);
    CHECK(s.predict(std::vector<double>{0.25}) ==
          doctest::Approx((0.2 * w0 + 0.9 * w1) / (w0 + w1)).epsilon(1e-14));
  }
  SUBCASE("k above the point count is truncated") {
    auto s = Surrogate::fit({{{0.0}, 0.2}, {{1.0}, 0.9}}, {10, std::nullopt});
    CHECK(s.k() == 2);
  }
  SUBCASE("empty training set") {
    try {
      Surrogate::fit({});
      FAIL("expected EmptyTrainingSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyTrainingSet);
    }
  }
}

TEST_CASE("surrogate predictions stay within the training quality range") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SurrogatePoint> pts(8);
    double lo = 1, hi = 0;
    for (auto& p : pts) {
      p.hyperparams = {u(rng), u(rng)};
      p.quality = u(rng);
      lo = std::min(lo, p.quality);
      hi = std::max(hi, p.quality);
    }
    // A tiny bandwidth drives far queries towards weight underflow.
    const double bw = trial % 2 ? 1e-3 : 0.0;
    SurrogateOptions opts;
    if (bw > 0) opts.bandwidth = bw;
    auto s = Surrogate::fit(pts, opts);
    for (int q = 0; q < 10; ++q) {
      const double pred = s.predict(std::vector<double>{3 * u(rng) - 1, 3 * u(rng) - 1});
      CHECK(std::isfinite(pred));
      CHECK(pred >= lo);
      CHECK(pred <= hi);
    }
  }
}

TEST_CASE("median pairwise distance") {
  std::vector<SurrogatePoint> pts{{{0.0}, 0}, {{1.0}, 0}, {{3.0}, 0}};
  CHECK(median_pairwise_distance(pts) == 2.0);  // {1, 3, 2}
  std::vector<SurrogatePoint> one{{{0.0}, 0}};
  CHECK(median_pairwise_distance(one) == 1.0);
  std::vector<SurrogatePoint> same{{{0.5}, 0}, {{0.5}, 1}};
  CHECK(median_pairwise_distance(same) == 1.0);
}

namespace {

// Runs on a 1-d hyperparameter grid with quality = f(h).
template <typename F>
std::vector<RunRecord> grid_runs(const std::string& task, const std::string& setup,
                                 F f, int n = 9) {
  std::vector<RunRecord> runs;
  for (int i = 0; i < n; ++i) {
    const double h = (i + 0.5) / n;
    runs.push_back({task, setup, static_cast<std::uint64_t>(i), {h}, f(h)});
  }
  return runs;
}

}  // namespace

TEST_CASE("performance similarity") {
  RunStore store;
  TaskSet train;
  auto bowl = [](double c) {
    return [c](double h) { return 0.9 - (h - c) * (h - c); };
  };
  train.add(make_task("same"));
  train.add(make_task("opposed"));
  train.add(make_task("flat"));
  for (const auto& r : grid_runs("same", "base", bowl(0.2))) store.add(r);
  for (const auto& r : grid_runs("opposed", "base", [](double h) { return 0.5 + 0.4 * h; }))
    store.add(r);
  for (const auto& r : grid_runs("flat", "base", [](double) { return 0.7; })) store.add(r);
  for (const auto& r : grid_runs("hold", "base", bowl(0.2))) store.add(r);

  const auto holdout = store.runs("hold", "base");
  const auto sims = performance_similarity(train, holdout, "base", store);
  CHECK(sims.at("same") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sims.at("flat") == 0.0);
  CHECK(sims.at("opposed") < 0.0);

  // Independent sign check: the opposed surface is increasing while the
  // holdout decreases past its optimum at 0.2.
  std::vector<double> pred, actual;
  for (const auto& r : holdout) {
    pred.push_back(0.5 + 0.4 * r.hyperparams[0]);
    actual.push_back(r.quality);
  }
  CHECK(oracle::spearman(pred, actual) < 0.0);
  CHECK(sims.at("opposed") == doctest::Approx(oracle::spearman(pred, actual)));

  const auto by_id = performance_descriptor_similarity(train, "hold", "base", store);
  CHECK(by_id.values == sims.values);

  SUBCASE("fewer than three holdout runs") {
    std::vector<RunRecord> few(holdout.begin(), holdout.begin() + 2);
    try {
      performance_similarity(train, few, "base", store);
      FAIL("expected InsufficientHoldoutRuns");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInsufficientHoldoutRuns);
    }
  }
}

TEST_CASE("oracle similarity") {
  RunStore store;
  const std::vector<std::string> setups{"s0", "s1", "s2", "s3"};
  auto put = [&](const std::string& task, std::vector<double> q) {
    for (std::size_t i = 0; i < setups.size(); ++i) {
      store.add({task, setups[i], 0, {}, q[i]});
    }
  };
  put("hold", {0.9, 0.8, 0.7, 0.6});
  put("rev", {0.6, 0.7, 0.8, 0.9});
  put("mono", {0.99, 0.95, 0.5, 0.1});
  TaskSet train;
  train.add(make_task("rev"));
  train.add(make_task("mono"));
  train.add(make_task("hold"));
  const auto sims = oracle_similarity(train, "hold", setups, store);
  CHECK(sims.at("rev") == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(sims.at("mono") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sims.at("hold") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sims.at("rev") ==
        doctest::Approx(oracle::spearman({0.6, 0.7, 0.8, 0.9}, {0.9, 0.8, 0.7, 0.6})));

  const std::vector<std::string> two{"s0", "s1"};
  try {
    oracle_similarity(train, "hold", two, store);
    FAIL("expected InsufficientSetups");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientSetups);
  }
  const std::vector<std::string> missing{"s0", "s1", "s2", "nope"};
  try {
    oracle_similarity(train, "hold", missing, store);
    FAIL("expected NoRuns");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoRuns);
  }
}
