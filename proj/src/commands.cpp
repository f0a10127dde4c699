#include "taskfilter/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "taskfilter/change_eval.hpp"
#include "taskfilter/errors.hpp"
#include "taskfilter/filter_eval.hpp"
#include "taskfilter/synth.hpp"

namespace taskfilter::cli {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError,
                "cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::ofstream open_report(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) {
    throw Error(ErrorCode::kConfigError, std::string("config needs '") + what + "'");
  }
  if (!fs::exists(p)) {
    throw Error(ErrorCode::kConfigError,
                std::string(what) + " file does not exist: " + p.string());
  }
}

void require_change(const Change& change) {
  if (change.baseline_setup.empty() || change.modified_setup.empty()) {
    throw Error(ErrorCode::kConfigError,
                "config needs change.baseline and change.modified");
  }
}

struct Inputs {
  TaskSet tasks;
  RunStore runs;
};

Inputs load_inputs(const ExperimentConfig& cfg) {
  require_path(cfg.tasks_path, "tasks");
  require_path(cfg.runs_path, "runs");
  Inputs in;
  in.tasks = ingest_tasks(cfg.tasks_path);
  in.runs = ingest_runs(cfg.runs_path, in.tasks);
  return in;
}

void require_setups(const RunStore& store, const Change& change) {
  const auto setups = store.setups();
  for (const auto& s : {change.baseline_setup, change.modified_setup}) {
    if (!std::binary_search(setups.begin(), setups.end(), s)) {
      throw Error(ErrorCode::kNoRuns, "no runs at all under setup '" + s + "'");
    }
  }
}

std::string fmt(double v) { return format_double(v); }

std::string fmt_opt(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

PartitionPlan make_plan(const ExperimentConfig& cfg, const TaskSet& tasks,
                        std::size_t holdout_size) {
  return sample_partitions(tasks, cfg.partitions.mode, holdout_size,
                           cfg.partitions.count, cfg.seed,
                           cfg.partitions.train_source);
}

// Runs fn(i) for i in [0, n) on `jobs` threads. The first exception in index
// order is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int exit_code_for(const Error& error) {
  return is_validation_error(error.code()) ? kExitValidation : kExitRuntime;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(sa.size());
    const double fb = static_cast<double>(j) / static_cast<double>(sb.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

void check_holdout_access(const ExperimentConfig& cfg,
                          std::span<const FilterSpec> filters) {
  if (cfg.access != HoldoutAccess::kDescriptorOnly) return;
  for (const auto& f : filters) {
    if (f.kind == FilterKind::kOracleSim) {
      throw Error(ErrorCode::kAccessDenied,
                  "filter '" + f.label() +
                      "' uses oracle similarity, which needs holdout qualities "
                      "under every setup; the holdout store is "
                      "descriptor-only, so oracle_sim cannot be used (it is a "
                      "development-time bound, not usable on production tasks)");
    }
  }
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& s = cfg.simulate;
  auto spec = synth::default_benchmark(cfg.seed, s.shift, s.n_dev, s.n_prod);
  spec.simulation.runs_per = s.runs_per;
  spec.simulation.curvature = s.curvature;
  const auto bench = synth::build_benchmark(spec);

  ensure_out_dir(cfg.out_dir);
  write_tasks(cfg.out_dir / "tasks.jsonl", bench.population.tasks);
  write_runs(cfg.out_dir / "runs.csv", bench.runs);

  auto out = open_report(cfg.out_dir / "simulate_summary.csv");
  out << "descriptor,dev_mean,prod_mean,mean_diff,ks_statistic\n";
  for (const auto& [name, _] : spec.dev.descriptor_means) {
    std::vector<double> dev, prod;
    for (const auto& t : bench.population.tasks) {
      (t.source_tag == spec.dev.source_tag ? dev : prod)
          .push_back(t.descriptors.at(name));
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? 0.0
                       : std::accumulate(v.begin(), v.end(), 0.0) /
                             static_cast<double>(v.size());
    };
    out << name << ',' << fmt(mean(dev)) << ',' << fmt(mean(prod)) << ','
        << fmt(mean(prod) - mean(dev)) << ',' << fmt(ks_statistic(dev, prod))
        << '\n';
  }
  log << "simulated " << bench.population.tasks.size() << " tasks ("
      << s.n_dev << " dev, " << s.n_prod << " prod, shift " << fmt(s.shift)
      << "), " << bench.runs.size() << " runs over " << spec.setups.size()
      << " setups -> " << cfg.out_dir.string() << '\n';
}

// ------------------------------------------------------------ ingest-check

void cmd_ingest_check(const ExperimentConfig& cfg, std::ostream& log) {
  const auto in = load_inputs(cfg);
  const auto setups = in.runs.setups();
  std::map<std::string, std::size_t> by_source;
  for (const auto& t : in.tasks) ++by_source[t.source_tag];
  std::size_t missing = 0;
  for (const auto& t : in.tasks) {
    for (const auto& s : setups) missing += in.runs.has(t.id, s) ? 0 : 1;
  }

  ensure_out_dir(cfg.out_dir);
  auto out = open_report(cfg.out_dir / "ingest_check.csv");
  out << "item,value\n";
  out << "tasks," << in.tasks.size() << '\n';
  for (const auto& [tag, n] : by_source) out << "tasks[" << tag << "]," << n << '\n';
  out << "runs," << in.runs.size() << '\n';
  out << "setups," << setups.size() << '\n';
  out << "hp_dim," << in.runs.hp_dim() << '\n';
  out << "missing_task_setup_pairs," << missing << '\n';

  log << "ok: " << in.tasks.size() << " tasks, " << in.runs.size() << " runs, "
      << setups.size() << " setups, hp_dim " << in.runs.hp_dim() << ", "
      << missing << " (task, setup) pairs without runs\n";
}

// ------------------------------------------------------------- eval-change

void cmd_eval_change(const ExperimentConfig& cfg, std::ostream& log) {
  require_change(cfg.change);
  const auto in = load_inputs(cfg);
  require_setups(in.runs, cfg.change);
  const auto report = eval_system_change(in.tasks, cfg.change, in.runs, cfg.eps);

  ensure_out_dir(cfg.out_dir);
  {
    auto out = open_report(cfg.out_dir / "eval_change.csv");
    out << "task_id,source_tag,prob_improved,prob_clipped,eps\n";
    for (std::size_t i = 0; i < report.per_task.size(); ++i) {
      const auto& [id, p] = report.per_task[i];
      out << id << ',' << in.tasks.at(id).source_tag << ','
          << fmt(report.raw_per_task[i]) << ',' << fmt(p) << ','
          << fmt(report.eps_used[i]) << '\n';
    }
  }
  {
    auto out = open_report(cfg.out_dir / "eval_change_summary.csv");
    out << "baseline,modified,tasks,aggregate,eps_policy\n";
    out << cfg.change.baseline_setup << ',' << cfg.change.modified_setup << ','
        << in.tasks.size() << ',' << fmt(report.aggregate) << ','
        << (report.eps_auto ? "auto" : "fixed") << '\n';
  }
  if (!cfg.bootstrap.sizes.empty()) {
    // Aggregates over random task subsets of each size, from per-task values.
    std::vector<std::string> ids;
    std::vector<double> clipped;
    for (const auto& [id, p] : report.per_task) {
      ids.push_back(id);
      clipped.push_back(p);
    }
    std::mt19937_64 rng(cfg.seed);
    auto out = open_report(cfg.out_dir / "eval_change_bootstrap.csv");
    out << "n,sample,aggregate\n";
    for (std::size_t n : cfg.bootstrap.sizes) {
      if (n > ids.size()) {
        throw Error(ErrorCode::kConfigError,
                    "bootstrap size " + std::to_string(n) + " exceeds the " +
                        std::to_string(ids.size()) + " tasks");
      }
      std::vector<std::size_t> idx(ids.size());
      for (std::size_t s = 0; s < cfg.bootstrap.samples; ++s) {
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
          std::swap(idx[i], idx[pick(rng)]);
        }
        std::vector<std::string> sub_ids;
        std::vector<double> sub_p;
        for (std::size_t i = 0; i < n; ++i) {
          sub_ids.push_back(ids[idx[i]]);
          sub_p.push_back(clipped[idx[i]]);
        }
        out << n << ',' << s << ',' << fmt(aggregate_probabilities(sub_ids, sub_p))
            << '\n';
      }
    }
  }
  log << "change " << cfg.change.baseline_setup << " -> "
      << cfg.change.modified_setup << ": improvement probability "
      << fmt(report.aggregate) << " over " << in.tasks.size() << " tasks\n";
}

// ------------------------------------------------------------- eval-filter

void cmd_eval_filter(const ExperimentConfig& cfg, std::ostream& log) {
  require_change(cfg.change);
  if (cfg.filters.empty()) {
    throw Error(ErrorCode::kConfigError, "config lists no filters");
  }
  check_holdout_access(cfg, cfg.filters);
  const auto in = load_inputs(cfg);
  require_setups(in.runs, cfg.change);
  const auto plan = make_plan(cfg, in.tasks, cfg.partitions.holdout_size);

  std::vector<std::vector<FilterLossRecord>> results(cfg.filters.size());
  parallel_for(cfg.filters.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = eval_filter_over_plan(cfg.filters[i], in.tasks, plan,
                                       cfg.change, in.runs, cfg.eval_options());
  });

  ensure_out_dir(cfg.out_dir);
  auto out = open_report(cfg.out_dir / "eval_filter.csv");
  auto summary = open_report(cfg.out_dir / "eval_filter_summary.csv");
  out << "partition,filter,y,t,log_loss\n";
  summary << "filter,kind,length,partitions,mean_log_loss,cross_entropy\n";
  for (std::size_t i = 0; i < cfg.filters.size(); ++i) {
    const auto& f = cfg.filters[i];
    write_loss_records(out, results[i], false);
    const double m = mean_log_loss(results[i]);
    summary << f.label() << ',' << filter_kind_name(f.kind) << ',' << f.length
            << ',' << results[i].size() << ',' << fmt(m) << ',' << fmt(-m) << '\n';
    log << f.label() << ": mean log_loss " << fmt(m) << " over "
        << results[i].size() << " partitions\n";
  }
}

// ---------------------------------------------------------------- contrast

void cmd_contrast(const ExperimentConfig& cfg, std::ostream& log) {
  require_change(cfg.change);
  if (!cfg.contrast) {
    throw Error(ErrorCode::kConfigError, "config needs a 'contrast' section");
  }
  const FilterSpec new_f = cfg.filter(cfg.contrast->new_filter);
  const FilterSpec base_f = cfg.filter(cfg.contrast->baseline_filter);
  const FilterSpec pair[] = {new_f, base_f};
  check_holdout_access(cfg, pair);
  const auto in = load_inputs(cfg);
  require_setups(in.runs, cfg.change);
  const auto plan = make_plan(cfg, in.tasks, cfg.partitions.holdout_size);

  std::vector<FilterLossRecord> recs[2];
  parallel_for(2, cfg.jobs, [&](std::size_t i) {
    recs[i] = eval_filter_over_plan(pair[i], in.tasks, plan, cfg.change,
                                    in.runs, cfg.eval_options());
  });
  const auto s = summarize_contrast(new_f.label(), base_f.label(),
                                    std::move(recs[0]), std::move(recs[1]));

  ensure_out_dir(cfg.out_dir);
  {
    auto out = open_report(cfg.out_dir / "contrast.csv");
    out << "partition,filter,y,t,log_loss\n";
    write_loss_records(out, s.new_records, false);
    write_loss_records(out, s.baseline_records, false);
  }
  {
    auto out = open_report(cfg.out_dir / "contrast_summary.csv");
    out << "new,baseline,partitions,mean_new,mean_baseline,mean_diff,"
           "cross_entropy_new,cross_entropy_baseline,p_value,significant\n";
    out << s.new_filter << ',' << s.baseline_filter << ','
        << s.new_records.size() << ',' << fmt(s.mean_new) << ','
        << fmt(s.mean_baseline) << ',' << fmt(s.mean_diff) << ','
        << fmt(s.cross_entropy_new) << ',' << fmt(s.cross_entropy_baseline)
        << ',' << fmt_opt(s.p_value) << ',' << (s.significant ? "true" : "false")
        << '\n';
  }
  log << s.new_filter << " vs " << s.baseline_filter << ": mean log_loss diff "
      << fmt(s.mean_diff) << ", p = "
      << (s.p_value ? fmt(*s.p_value) : std::string("n/a"))
      << (s.significant ? " (significant)" : "") << '\n';
}

// ------------------------------------------------------------------- sweep

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  require_change(cfg.change);
  if (cfg.filters.empty()) {
    throw Error(ErrorCode::kConfigError, "config lists no filters");
  }
  check_holdout_access(cfg, cfg.filters);
  const auto in = load_inputs(cfg);
  require_setups(in.runs, cfg.change);

  const auto lengths = cfg.sweep.lengths.empty()
                           ? std::vector<std::size_t>{cfg.partitions.holdout_size}
                           : cfg.sweep.lengths;
  const auto holdout_sizes =
      cfg.sweep.holdout_sizes.empty()
          ? std::vector<std::size_t>{cfg.partitions.holdout_size}
          : cfg.sweep.holdout_sizes;

  // Filter list per cell: the configured filters plus a random baseline.
  std::vector<FilterSpec> filters = cfg.filters;
  FilterSpec baseline;
  baseline.name = "random_baseline";
  baseline.kind = FilterKind::kRandom;
  baseline.seed = cfg.seed;
  filters.push_back(baseline);
  const std::size_t nf = filters.size();

  std::vector<std::optional<PartitionPlan>> plans(holdout_sizes.size());
  std::vector<std::string> plan_status(holdout_sizes.size(), "ok");
  for (std::size_t h = 0; h < holdout_sizes.size(); ++h) {
    try {
      plans[h] = make_plan(cfg, in.tasks, holdout_sizes[h]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasiblePartition) throw;
      plan_status[h] = "infeasible";
    }
  }

  struct Cell {
    std::vector<FilterLossRecord> records;
    std::string status = "ok";
  };
  const std::size_t n_cells = holdout_sizes.size() * lengths.size() * nf;
  std::vector<Cell> cells(n_cells);
  auto cell_index = [&](std::size_t h, std::size_t l, std::size_t f) {
    return (h * lengths.size() + l) * nf + f;
  };
  parallel_for(n_cells, cfg.jobs, [&](std::size_t idx) {
    const std::size_t f = idx % nf;
    const std::size_t l = (idx / nf) % lengths.size();
    const std::size_t h = idx / (nf * lengths.size());
    auto& cell = cells[idx];
    if (!plans[h]) {
      cell.status = plan_status[h];
      return;
    }
    FilterSpec spec = filters[f];
    spec.length = lengths[l];
    try {
      cell.records = eval_filter_over_plan(spec, in.tasks, *plans[h], cfg.change,
                                           in.runs, cfg.eval_options());
    } catch (const Error& e) {
      if (is_validation_error(e.code())) throw;
      cell.records.clear();
      cell.status = std::string(error_code_name(e.code()));
    }
  });

  ensure_out_dir(cfg.out_dir);
  auto out = open_report(cfg.out_dir / "sweep.csv");
  auto rec_out = open_report(cfg.out_dir / "sweep_records.csv");
  out << "holdout_size,length,filter,kind,partitions,mean_log_loss,"
         "cross_entropy,loss_diff_from_random,p_value,significant,status\n";
  rec_out << "holdout_size,length,partition,filter,y,t,log_loss\n";
  std::size_t ok_cells = 0;
  for (std::size_t h = 0; h < holdout_sizes.size(); ++h) {
    for (std::size_t l = 0; l < lengths.size(); ++l) {
      const auto& base = cells[cell_index(h, l, nf - 1)];
      for (std::size_t f = 0; f < nf; ++f) {
        const auto& cell = cells[cell_index(h, l, f)];
        out << holdout_sizes[h] << ',' << lengths[l] << ',' << filters[f].label()
            << ',' << filter_kind_name(filters[f].kind) << ',';
        if (cell.status != "ok") {
          out << ",,,,,," << cell.status << '\n';
          continue;
        }
        ++ok_cells;
        const double m = mean_log_loss(cell.records);
        out << cell.records.size() << ',' << fmt(m) << ',' << fmt(-m) << ',';
        if (base.status == "ok") {
          std::vector<FilterLossRecord> a = cell.records, b = base.records;
          const auto c = summarize_contrast(filters[f].label(), "random_baseline",
                                            std::move(a), std::move(b));
          out << fmt(c.mean_diff) << ',' << fmt_opt(c.p_value) << ','
              << (c.significant ? "true" : "false");
        } else {
          out << ",,";
        }
        out << ",ok\n";
        for (const auto& r : cell.records) {
          rec_out << holdout_sizes[h] << ',' << lengths[l] << ','
                  << r.partition_index << ',' << r.filter << ',' << fmt(r.y)
                  << ',' << fmt(r.t) << ',' << fmt(r.log_loss) << '\n';
        }
      }
    }
  }
  log << "sweep: " << holdout_sizes.size() << " holdout sizes x "
      << lengths.size() << " lengths x " << nf << " filters, " << ok_cells
      << " of " << n_cells << " cells evaluated -> "
      << (cfg.out_dir / "sweep.csv").string() << '\n';
}

}  // namespace taskfilter::cli
