// Command-line harness: simulate data, check inputs, evaluate changes and
// filters, contrast filters and run sweeps. See README.md for the config
// format.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "taskfilter/commands.hpp"

namespace {

using taskfilter::cli::ExperimentConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
};

ExperimentConfig load(const CommonFlags& flags, bool config_required) {
  nlohmann::json doc = nlohmann::json::object();
  std::filesystem::path base;
  if (!flags.config.empty()) {
    doc = taskfilter::cli::read_config_json(flags.config);
    base = std::filesystem::path(flags.config).parent_path();
  } else if (config_required) {
    throw taskfilter::Error(taskfilter::ErrorCode::kConfigError,
                            "--config is required for this command");
  }
  if (flags.seed && doc.is_object()) doc["seed"] = *flags.seed;
  auto cfg = taskfilter::cli::parse_config(doc, base);
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.jobs) {
    if (*flags.jobs == 0) {
      throw taskfilter::Error(taskfilter::ErrorCode::kConfigError,
                              "--jobs must be >= 1");
    }
    cfg.jobs = *flags.jobs;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Select development tasks relevant to a target task population "
               "and evaluate AutoML system changes on them"};
  app.require_subcommand(1);

  CommonFlags flags;
  using Command = std::function<void(const ExperimentConfig&, std::ostream&)>;
  struct Entry {
    const char* name;
    const char* help;
    Command run;
    bool needs_config;
  };
  const Entry entries[] = {
      {"simulate", "Generate a synthetic dev/prod benchmark",
       taskfilter::cli::cmd_simulate, false},
      {"ingest-check", "Validate task and run files",
       taskfilter::cli::cmd_ingest_check, true},
      {"eval-change", "Improvement probability of a change",
       taskfilter::cli::cmd_eval_change, true},
      {"eval-filter", "Log-loss of each filter over partitions",
       taskfilter::cli::cmd_eval_filter, true},
      {"contrast", "Compare two filters over partitions",
       taskfilter::cli::cmd_contrast, true},
      {"sweep", "Grid over filters, lengths and holdout sizes",
       taskfilter::cli::cmd_sweep, true},
  };

  const Entry* chosen = nullptr;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", flags.config, "Experiment config (JSON)");
    sub->add_option("--seed", flags.seed, "Global seed (overrides config)");
    sub->add_option("--out", flags.out, "Output directory (overrides config)");
    sub->add_option("--jobs", flags.jobs, "Worker threads");
    sub->callback([&chosen, &e] { chosen = &e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? taskfilter::cli::kExitOk : taskfilter::cli::kExitValidation;
  }

  try {
    const auto cfg = load(flags, chosen->needs_config);
    chosen->run(cfg, std::cout);
  } catch (const taskfilter::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return taskfilter::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return taskfilter::cli::kExitRuntime;
  }
  return taskfilter::cli::kExitOk;
}
