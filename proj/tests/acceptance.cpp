// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Thresholds are fixed here and never tuned per run.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "taskfilter/change_eval.hpp"
#include "taskfilter/errors.hpp"
#include "taskfilter/filter_eval.hpp"
#include "taskfilter/similarity.hpp"
#include "taskfilter/synth.hpp"

#ifndef TASKFILTER_CLI_PATH
#error "TASKFILTER_CLI_PATH must point at the taskfilter binary"
#endif

using namespace taskfilter;
using taskfilter::testing::slurp;
using taskfilter::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

FilterSpec make_spec(FilterKind kind, std::size_t length, std::uint64_t seed,
                     std::vector<std::string> keys = {"log10_datapoints"}) {
  FilterSpec s;
  s.kind = kind;
  s.length = length;
  s.seed = seed;
  s.name = std::string(filter_kind_name(kind));
  if (kind == FilterKind::kDescriptorSim) s.descriptor_keys = std::move(keys);
  return s;
}

int run_cli(const TempDir& dir, const std::string& args, std::string* err = nullptr) {
  const auto out = dir.path() / "stdout.txt";
  const auto errp = dir.path() / "stderr.txt";
  const std::string cmd = std::string(TASKFILTER_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + errp.string();
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(errp);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// World seed and change used by the simulator-based criteria.
constexpr std::uint64_t kWorldSeed = 7;
const Change kChange{"default", "dnn_only"};
constexpr std::size_t kPartitions = 30;

// 1. improvement_probability against pair enumeration.
Outcome pairwise_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 6), level(0, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> cases;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> b(len(rng)), m(len(rng));
    const bool grid = i % 2 == 0;  // half the cases force ties
    for (double& x : b) x = grid ? level(rng) / 10.0 : u(rng);
    for (double& x : m) x = grid ? level(rng) / 10.0 : u(rng);
    cases.emplace_back(std::move(b), std::move(m));
  }
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& [b, m] : cases) {
    mismatches += improvement_probability(b, m) != oracle::pair_fraction(b, m);
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 1.0,
          std::to_string(mismatches) + " mismatches of 1000, " + num(secs) + " s"};
}

// 2. Logit symmetry and the identity change.
Outcome logit_aggregation() {
  TaskSet tasks;
  RunStore store;
  // t1: baseline 0.5 vs (0.6, 0.4, 0.4, 0.4) -> 0.25; t2: three wins -> 0.75.
  tasks.add(testing::make_task("t1"));
  tasks.add(testing::make_task("t2"));
  testing::add_runs(store, "t1", "b", {0.5});
  testing::add_runs(store, "t1", "m", {0.6, 0.4, 0.4, 0.4});
  testing::add_runs(store, "t2", "b", {0.5});
  testing::add_runs(store, "t2", "m", {0.6, 0.6, 0.6, 0.4});
  const auto sym = eval_system_change(tasks, {"b", "m"}, store);
  const bool sym_ok = sym.raw_per_task == std::vector<double>{0.25, 0.75} &&
                      std::fabs(sym.aggregate - 0.5) <= 1e-12;

  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> level(0.55, 0.85);
  TaskSet many;
  RunStore runs;
  for (int t = 0; t < 50; ++t) {
    const std::string id = "task" + std::to_string(t);
    many.add(testing::make_task(id));
    const double centre = level(rng);
    std::vector<double> q(20);
    for (double& x : q) x = std::clamp(centre + noise(rng), 0.0, 1.0);
    testing::add_runs(runs, id, "s", q);
  }
  const double identity = eval_system_change(many, {"s", "s"}, runs).aggregate;
  const bool id_ok = identity >= 0.40 && identity <= 0.60;
  return {sym_ok && id_ok, "symmetric pair -> " + num(sym.aggregate) +
                               ", identity change -> " + num(identity)};
}

// 3. The log-loss maximizer and the perfect-filter fixture.
Outcome log_loss_maximizer() {
  double worst_offset = 0.0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double best = -INFINITY, best_y = 0.0;
    for (int i = 1; i < 10000; ++i) {
      const double y = i * 1e-4;
      const double v = filter_log_loss(y, t);
      if (v > best) {
        best = v;
        best_y = y;
      }
    }
    worst_offset = std::max(worst_offset, std::fabs(best_y - t));
  }

  const auto bench = synth::build_benchmark(synth::default_benchmark(kWorldSeed, 2.0));
  const auto& tasks = bench.population.tasks;
  const auto plan =
      sample_partitions(tasks, PartitionMode::kBySource, 8, kPartitions, kWorldSeed, "dev");
  const std::vector<FilterSpec> others{
      make_spec(FilterKind::kRandom, 3, 1), make_spec(FilterKind::kAll, 1, 0),
      make_spec(FilterKind::kDescriptorSim, 3, 0), make_spec(FilterKind::kPerformanceSim, 3, 0),
      make_spec(FilterKind::kOracleSim, 3, 0)};
  std::size_t failures = 0;
  for (std::size_t k = 0; k < plan.partitions.size(); ++k) {
    const auto& p = plan.partitions[k];
    const auto holdouts = tasks.subset(p.holdout_ids);
    const double t = eval_system_change(holdouts, kChange, bench.runs).aggregate;
    // The perfect filter selects the holdout set itself, so its y equals t.
    const double perfect = filter_log_loss(t, t);
    // Scan maximum of the loss for this t.
    double scan = -INFINITY;
    for (int i = 1; i < 10000; ++i) scan = std::max(scan, filter_log_loss(i * 1e-4, t));
    if (perfect < scan - 1e-6) ++failures;
    for (const auto& f : others) {
      const auto rec = eval_filter(f, tasks.subset(p.train_ids), holdouts, kChange, bench.runs);
      if (rec.log_loss > perfect) ++failures;
    }
  }
  return {worst_offset <= 1e-3 && failures == 0,
          "max |argmax - t| = " + num(worst_offset) + ", perfect-filter violations " +
              std::to_string(failures) + " over " + std::to_string(plan.partitions.size()) +
              " partitions"};
}

// 4. Correlations against the O(n^2) oracle.
Outcome correlation_oracles() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(2, 30), level(0, 5);
  std::normal_distribution<double> cont(0.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = trial % 3 == 0 ? cont(rng) : level(rng);
      y[i] = trial % 3 == 1 ? cont(rng) : level(rng);
    }
    worst = std::max(worst, std::fabs(spearman(x, y) - oracle::spearman(x, y)));
    worst = std::max(worst, std::fabs(pearson(x, y) - oracle::pearson(x, y)));
  }
  return {worst <= 1e-12, "max abs deviation " + num(worst) + " over 500 vector pairs"};
}

nlohmann::json cli_config(double shift) {
  auto cfg = nlohmann::json::parse(R"({
    "tasks": "data/tasks.jsonl",
    "runs": "data/runs.csv",
    "out": "out",
    "change": {"baseline": "default", "modified": "dnn_only"},
    "partitions": {"mode": "by_source", "train_source": "dev",
                   "holdout_size": 18, "count": 30},
    "filters": [
      {"name": "random", "kind": "random", "length": 3},
      {"name": "all", "kind": "all"},
      {"name": "desc", "kind": "descriptor_sim", "length": 3,
       "descriptor_keys": ["log10_datapoints"]},
      {"name": "desc_both", "kind": "descriptor_sim", "length": 3,
       "descriptor_keys": ["log10_datapoints", "log10_features"]},
      {"name": "perf", "kind": "performance_sim", "length": 3},
      {"name": "oracle", "kind": "oracle_sim", "length": 3}
    ],
    "contrast": {"new": "desc", "baseline": "random"},
    "sweep": {"lengths": [1, 3, 12], "holdout_sizes": [1, 8, 18]},
    "eval_change": {"bootstrap_sizes": [1, 3, 10], "bootstrap_samples": 20}
  })");
  cfg["seed"] = kWorldSeed;
  cfg["simulate"] = {{"shift", shift}};
  return cfg;
}

// 5. Sweep cells at length = |train| agree bit-for-bit across filters.
Outcome equal_at_full_length() {
  TempDir dir("acc_full");
  const auto cfg_path = dir.write("config.json", cli_config(2.0).dump(2));
  std::string err;
  if (run_cli(dir, "simulate --config " + cfg_path.string() + " --out " +
                       (dir.path() / "data").string(),
              &err) != 0) {
    return {false, "simulate failed: " + err};
  }
  if (run_cli(dir, "sweep --config " + cfg_path.string(), &err) != 0) {
    return {false, "sweep failed: " + err};
  }
  std::istringstream in(slurp(dir.path() / "out/sweep.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::set<std::string>> by_holdout;
  std::size_t cells = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() < 6 || c[1] != "12") continue;
    by_holdout[c[0]].insert(c[5]);
    ++cells;
  }
  bool ok = by_holdout.size() == 3 && cells == 3 * 7;
  for (const auto& [h, v] : by_holdout) ok = ok && v.size() == 1 && !v.begin()->empty();
  return {ok, std::to_string(cells) + " cells at length 12 over " +
                  std::to_string(by_holdout.size()) + " holdout sizes, distinct values per size: " +
                  [&] {
                    std::string s;
                    for (const auto& [h, v] : by_holdout) s += std::to_string(v.size()) + " ";
                    return s;
                  }()};
}

struct ShiftResult {
  double mean_diff;
  std::optional<double> p;
};

ShiftResult shift_contrast(std::uint64_t seed) {
  const auto bench = synth::build_benchmark(synth::default_benchmark(seed, 2.0));
  const auto& tasks = bench.population.tasks;
  const auto plan =
      sample_partitions(tasks, PartitionMode::kBySource, 18, kPartitions, seed, "dev");
  const auto s = contrast_filters(make_spec(FilterKind::kDescriptorSim, 3, seed),
                                  make_spec(FilterKind::kRandom, 3, seed), kChange, plan,
                                  tasks, bench.runs);
  return {s.mean_diff, s.p_value};
}

// 6. Descriptor filter beats random under shift.
Outcome shift_benefit() {
  const auto t0 = Clock::now();
  const auto r = shift_contrast(kWorldSeed);
  const double secs = seconds_since(t0);
  const bool ok = r.mean_diff > 0.0 && r.p && *r.p < 0.05 && secs < 60.0;
  return {ok, "seed " + std::to_string(kWorldSeed) + ": mean_diff " + num(r.mean_diff) +
                  ", p " + (r.p ? num(*r.p) : std::string("n/a")) + ", " + num(secs) + " s"};
}

std::string shift_robustness() {
  int wins = 0;
  std::string losers;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = shift_contrast(seed);
    if (r.mean_diff > 0.0 && r.p && *r.p < 0.05) {
      ++wins;
    } else {
      losers += " " + std::to_string(seed);
    }
  }
  return std::to_string(wins) + "/20 world seeds meet criterion 6" +
         (losers.empty() ? "" : "; misses at seeds" + losers);
}

struct NullWorld {
  synth::Benchmark bench;
  PartitionPlan plan;
};

NullWorld null_world() {
  auto bench = synth::build_benchmark(synth::default_benchmark(kWorldSeed, 0.0));
  auto plan = sample_partitions(bench.population.tasks, PartitionMode::kRandomSplit, 18,
                                kPartitions, kWorldSeed);
  return {std::move(bench), std::move(plan)};
}

double cross_entropy(const FilterSpec& spec, const NullWorld& w, const Change& change) {
  return -mean_log_loss(
      eval_filter_over_plan(spec, w.bench.population.tasks, w.plan, change, w.bench.runs));
}

// 7. No shift: selecting everything is never clearly worse.
Outcome no_shift_null() {
  const auto w = null_world();
  const double ce_all = cross_entropy(make_spec(FilterKind::kAll, 1, 0), w, kChange);
  double worst_gap = -INFINITY;
  std::string worst;
  for (auto kind : {FilterKind::kRandom, FilterKind::kDescriptorSim,
                    FilterKind::kPerformanceSim, FilterKind::kOracleSim}) {
    const double ce = cross_entropy(make_spec(kind, 3, kWorldSeed), w, kChange);
    if (ce_all - ce > worst_gap) {
      worst_gap = ce_all - ce;
      worst = std::string(filter_kind_name(kind));
    }
  }
  return {worst_gap <= 0.05, "all-tasks cross-entropy " + num(ce_all) +
                                 ", largest excess over a length-3 filter " + num(worst_gap) +
                                 " (" + worst + ")"};
}

// 8. A dominating change leaves nothing for filtering to fix.
Outcome always_improving() {
  const auto w = null_world();
  const Change dominating{"default", "compute_5x"};
  const std::size_t n_train = w.plan.partitions.front().train_ids.size();
  double worst = 0.0;
  for (std::size_t len = 3; len <= n_train; ++len) {
    const auto recs = eval_filter_over_plan(make_spec(FilterKind::kRandom, len, kWorldSeed),
                                            w.bench.population.tasks, w.plan, dominating,
                                            w.bench.runs);
    for (const auto& r : recs) worst = std::max(worst, std::fabs(r.log_loss));
  }
  return {worst < 0.05, "max |log_loss| " + num(worst) + " over random lengths 3.." +
                            std::to_string(n_train) + " and every partition"};
}

// 9. A short similarity filter matches the full set.
Outcome twenty_percent() {
  const auto w = null_world();
  const std::size_t n_train = w.plan.partitions.front().train_ids.size();
  const auto max_len = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(n_train)));
  const double ce_all = cross_entropy(make_spec(FilterKind::kAll, 1, 0), w, kChange);
  double best = INFINITY;
  std::string best_label;
  for (auto kind :
       {FilterKind::kDescriptorSim, FilterKind::kPerformanceSim, FilterKind::kOracleSim}) {
    for (std::size_t len = 1; len <= max_len; ++len) {
      const double gap = std::fabs(cross_entropy(make_spec(kind, len, 0), w, kChange) - ce_all);
      if (gap < best) {
        best = gap;
        best_label = std::string(filter_kind_name(kind)) + " length " + std::to_string(len);
      }
    }
  }
  return {best <= 0.1, "|train| " + std::to_string(n_train) + ", lengths <= " +
                           std::to_string(max_len) + ": closest " + best_label +
                           ", cross-entropy gap " + num(best)};
}

// 10. Every command twice with one seed: identical bytes.
Outcome determinism() {
  TempDir dir("acc_det");
  auto cfg = cli_config(2.0);
  cfg["partitions"]["count"] = 10;
  const auto cfg_path = dir.write("config.json", cfg.dump(2));
  std::string err;
  if (run_cli(dir, "simulate --config " + cfg_path.string() + " --out " +
                       (dir.path() / "data").string(),
              &err) != 0) {
    return {false, "simulate failed: " + err};
  }
  std::size_t files = 0, differing = 0;
  for (const char* cmd :
       {"simulate", "ingest-check", "eval-change", "eval-filter", "contrast", "sweep"}) {
    for (const char* run : {"a", "b"}) {
      const auto out = dir.path() / (std::string(run) + "_" + cmd);
      if (run_cli(dir, std::string(cmd) + " --config " + cfg_path.string() + " --out " +
                           out.string(),
                  &err) != 0) {
        return {false, std::string(cmd) + " failed: " + err};
      }
    }
    for (const auto& e : fs::directory_iterator(dir.path() / (std::string("a_") + cmd))) {
      ++files;
      const auto twin = dir.path() / (std::string("b_") + cmd) / e.path().filename();
      if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++differing;
    }
  }
  return {files > 0 && differing == 0, std::to_string(files) + " files from 6 commands, " +
                                           std::to_string(differing) + " differ"};
}

// 11. Oracle filter refused on descriptor-only holdouts.
Outcome access_guard() {
  TempDir dir("acc_guard");
  auto cfg = cli_config(2.0);
  cfg["holdout_access"] = "descriptor_only";
  const auto cfg_path = dir.write("config.json", cfg.dump(2));
  std::string err;
  if (run_cli(dir, "simulate --config " + cfg_path.string() + " --out " +
                       (dir.path() / "data").string(),
              &err) != 0) {
    return {false, "simulate failed: " + err};
  }
  const int code = run_cli(dir, "eval-filter --config " + cfg_path.string(), &err);
  const bool names = err.find("descriptor-only") != std::string::npos &&
                     err.find("oracle") != std::string::npos;
  std::string first_line = err.substr(0, err.find('\n'));
  if (first_line.size() > 90) first_line = first_line.substr(0, 90) + "...";
  return {code == 1 && names, "exit " + std::to_string(code) + ": " + first_line};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 pairwise probability oracle", pairwise_oracle},
      {"2 logit aggregation", logit_aggregation},
      {"3 log-loss maximizer", log_loss_maximizer},
      {"4 correlation oracles", correlation_oracles},
      {"5 equal at full length", equal_at_full_length},
      {"6 shift benefit", shift_benefit},
      {"7 no-shift null", no_shift_null},
      {"8 always-improving change", always_improving},
      {"9 twenty-percent economy", twenty_percent},
      {"10 determinism", determinism},
      {"11 access guard", access_guard},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("INFO  6 robustness                   %s\n", shift_robustness().c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
