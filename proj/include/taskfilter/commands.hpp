#pragma once

// CLI subcommands. Each reads an ExperimentConfig, writes deterministic
// report files under config.out_dir and a short summary to `log`. Errors are
// thrown as taskfilter::Error; exit_code_for() maps them to process codes.

#include <iosfwd>
#include <span>
#include <vector>

#include "taskfilter/config.hpp"
#include "taskfilter/errors.hpp"

namespace taskfilter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

int exit_code_for(const Error& error);

// Writes tasks.jsonl, runs.csv and simulate_summary.csv (per-descriptor
// means by source and the two-sample KS statistic between sources).
void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);

// Validates the task and run files; writes ingest_check.csv.
void cmd_ingest_check(const ExperimentConfig& cfg, std::ostream& log);

// Writes eval_change.csv (per task), eval_change_summary.csv and, with
// bootstrap sizes configured, eval_change_bootstrap.csv.
void cmd_eval_change(const ExperimentConfig& cfg, std::ostream& log);

// Writes eval_filter.csv (partition,filter,y,t,log_loss) and
// eval_filter_summary.csv for every configured filter.
void cmd_eval_filter(const ExperimentConfig& cfg, std::ostream& log);

// Writes contrast.csv and contrast_summary.csv.
void cmd_contrast(const ExperimentConfig& cfg, std::ostream& log);

// Writes sweep.csv (one row per holdout size x length x filter) and
// sweep_records.csv (per-partition losses).
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

// Throws AccessDenied when an oracle_sim filter meets descriptor-only
// holdouts.
void check_holdout_access(const ExperimentConfig& cfg,
                          std::span<const FilterSpec> filters);

// Two-sample Kolmogorov-Smirnov statistic (sup |F_a - F_b|).
double ks_statistic(std::span<const double> a, std::span<const double> b);

}  // namespace taskfilter::cli
