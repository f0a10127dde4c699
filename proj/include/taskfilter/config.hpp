#pragma once

// Declarative experiment configuration (a single JSON file). Relative paths
// inside the file resolve against the file's directory.
//
//   {
//     "seed": 7, "jobs": 1,
//     "tasks": "tasks.jsonl", "runs": "runs.csv", "out": "out",
//     "change": {"baseline": "default", "modified": "dnn_only"},
//     "epsilon": "auto",                       // or a number in (0, 0.5)
//     "holdout_access": "full",                // or "descriptor_only"
//     "oracle_setups": [],                     // empty: every setup
//     "partitions": {"mode": "by_source", "train_source": "dev",
//                    "holdout_size": 18, "count": 30},
//     "filters": [{"name": "desc", "kind": "descriptor_sim", "length": 3,
//                  "descriptor_keys": ["log10_datapoints"]}],
//     "contrast": {"new": "desc", "baseline": "random"},
//     "sweep": {"lengths": [1, 3, 12], "holdout_sizes": [1, 8, 18]},
//     "eval_change": {"bootstrap_sizes": [1, 5], "bootstrap_samples": 100},
//     "simulate": {"shift": 2.0, "n_dev": 12, "n_prod": 18, "runs_per": 10}
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskfilter/change_eval.hpp"
#include "taskfilter/filter_eval.hpp"
#include "taskfilter/filters.hpp"

namespace taskfilter::cli {

struct PartitionSettings {
  PartitionMode mode = PartitionMode::kRandomSplit;
  std::string train_source;
  std::size_t holdout_size = 1;
  std::size_t count = 30;
};

struct SweepSettings {
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> holdout_sizes;
};

struct BootstrapSettings {
  std::vector<std::size_t> sizes;
  std::size_t samples = 100;
};

struct SimulateSettings {
  double shift = 2.0;
  std::size_t n_dev = 12;
  std::size_t n_prod = 18;
  std::size_t runs_per = 10;
  double curvature = 0.3;
};

struct ContrastSettings {
  std::string new_filter;
  std::string baseline_filter;
};

struct ExperimentConfig {
  std::filesystem::path tasks_path;
  std::filesystem::path runs_path;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  Change change;
  Epsilon eps = Epsilon::automatic();
  HoldoutAccess access = HoldoutAccess::kFull;
  std::vector<std::string> oracle_setups;
  PartitionSettings partitions;
  std::vector<FilterSpec> filters;
  std::optional<ContrastSettings> contrast;
  SweepSettings sweep;
  BootstrapSettings bootstrap;
  SimulateSettings simulate;

  EvalOptions eval_options() const;
  // Throws ConfigError when no filter has this name.
  const FilterSpec& filter(const std::string& name) const;
};

// Filters without an explicit seed take the global seed. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});

nlohmann::json read_config_json(const std::filesystem::path& path);

FilterSpec parse_filter_spec(const nlohmann::json& doc, std::uint64_t default_seed);

}  // namespace taskfilter::cli
