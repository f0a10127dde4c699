#pragma once

// Synthetic AutoML simulator. Tasks get descriptors drawn from a (possibly
// shifted) Gaussian population and a hidden latent vector tied to those
// descriptors through a seeded linear map. Each setup's quality on a task is
//
//   clamp01(0.5 + bias + a * tanh(z . effect) - c * |h - h*(z)|^2 + noise)
//
// where h is the run's hyperparameter vector and h*(z) = offset + M z is the
// task's optimum. Latent vectors never leave the simulator.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "taskfilter/task_model.hpp"

namespace taskfilter::synth {

struct PopulationSpec {
  std::size_t n_tasks = 0;
  std::string id_prefix = "task";
  DescriptorMap descriptor_means;
  DescriptorMap descriptor_stdevs;
  // Added to the means; the latent map still standardizes with the unshifted
  // means so a shift moves the latent vectors too.
  DescriptorMap shift_offset;
  std::size_t latent_dim = 2;
  double latent_noise = 0.1;
  std::string source_tag = "dev";
  std::uint64_t seed = 0;
  // Seeds the descriptor-to-latent map; populations meant to share one world
  // must share this seed.
  std::uint64_t latent_map_seed = 0;
};

// Throws ConfigError for mismatched keys, non-positive stdevs or
// latent_dim == 0.
void validate_population_spec(const PopulationSpec& spec);

struct Population {
  TaskSet tasks;
  std::map<std::string, std::vector<double>> latents;
};

// Descriptors ~ Normal(mean + shift, stdev) per key in key order; count-like
// (log10) descriptors are floored at 0.
Population generate_population(const PopulationSpec& spec);

// Concatenates populations; throws DuplicateTask on id collisions.
Population merge_populations(std::span<const Population> parts);

// latent_dim x n_descriptors matrix of N(0, 1/n_descriptors) draws.
std::vector<std::vector<double>> latent_map(std::uint64_t seed,
                                            std::size_t latent_dim,
                                            std::size_t n_descriptors);

struct SetupModel {
  std::string setup_id;
  std::vector<double> effect_vector;  // latent_dim
  double effect_scale = 0.1;
  double bias = 0.0;
  // hp_dim x latent_dim; h*(z) = hp_optimum_offset + hp_optimum_map * z
  std::vector<std::vector<double>> hp_optimum_map;
  std::vector<double> hp_optimum_offset;
  double noise_std = 0.02;
};

void validate_setup(const SetupModel& setup, std::size_t latent_dim,
                    std::size_t hp_dim);

struct SimulationOptions {
  std::size_t runs_per = 10;
  std::size_t hp_dim = 2;
  double curvature = 0.3;
  std::uint64_t seed = 0;
};

// Noise-free part of the quality model, before clamping.
double mean_quality(std::span<const double> latent, const SetupModel& setup,
                    std::span<const double> hyperparams, double curvature);

// Hyperparameters ~ U[0,1]^hp_dim per run. Deterministic per seed; tasks in
// population order, setups in the given order.
RunStore simulate_runs(const Population& population,
                       std::span<const SetupModel> setups,
                       const SimulationOptions& options);

struct BenchmarkSpec {
  PopulationSpec dev;
  PopulationSpec prod;
  std::vector<SetupModel> setups;
  SimulationOptions simulation;
};

// Two descriptors (log10_datapoints, log10_features), a dev-tagged and a
// prod-tagged population sharing one latent map, and six setups: `default`,
// `dnn_only`, `transfer`, `new_impl`, `rf_only` with seeded effect vectors,
// and `compute_5x`, which is `default` plus a constant quality gain. `shift`
// is added to the prod population's log10_datapoints mean.
BenchmarkSpec default_benchmark(std::uint64_t seed, double shift,
                                std::size_t n_dev = 12, std::size_t n_prod = 18);

struct Benchmark {
  Population population;
  RunStore runs;
};

Benchmark build_benchmark(const BenchmarkSpec& spec);

}  // namespace taskfilter::synth
