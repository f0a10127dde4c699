#include "taskfilter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "taskfilter/errors.hpp"

namespace taskfilter::synth {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string padded_id(const std::string& prefix, std::size_t i, std::size_t n) {
  std::string num = std::to_string(i);
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  if (num.size() < width) num.insert(0, width - num.size(), '0');
  return prefix + num;
}

}  // namespace

void validate_population_spec(const PopulationSpec& spec) {
  if (spec.latent_dim == 0) {
    throw Error(ErrorCode::kConfigError, "latent_dim must be >= 1");
  }
  if (spec.descriptor_means.size() != spec.descriptor_stdevs.size()) {
    throw Error(ErrorCode::kConfigError,
                "descriptor_means and descriptor_stdevs name different keys");
  }
  for (const auto& [name, sd] : spec.descriptor_stdevs) {
    if (spec.descriptor_means.count(name) == 0) {
      throw Error(ErrorCode::kConfigError,
                  "descriptor '" + name + "' has a stdev but no mean");
    }
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw Error(ErrorCode::kConfigError,
                  "descriptor '" + name + "' stdev must be > 0");
    }
  }
  for (const auto& [name, _] : spec.shift_offset) {
    if (spec.descriptor_means.count(name) == 0) {
      throw Error(ErrorCode::kConfigError,
                  "shift names unknown descriptor '" + name + "'");
    }
  }
  if (spec.latent_noise < 0.0) {
    throw Error(ErrorCode::kConfigError, "latent_noise must be >= 0");
  }
}

std::vector<std::vector<double>> latent_map(std::uint64_t seed,
                                            std::size_t latent_dim,
                                            std::size_t n_descriptors) {
  std::mt19937_64 rng(seed);
  const double sd =
      1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_descriptors, 1)));
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<std::vector<double>> w(latent_dim, std::vector<double>(n_descriptors));
  for (auto& row : w) {
    for (double& v : row) v = normal(rng);
  }
  return w;
}

Population generate_population(const PopulationSpec& spec) {
  validate_population_spec(spec);
  const auto w = latent_map(spec.latent_map_seed, spec.latent_dim,
                            spec.descriptor_means.size());
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Population pop;
  for (std::size_t i = 0; i < spec.n_tasks; ++i) {
    Task task;
    task.id = padded_id(spec.id_prefix, i, spec.n_tasks);
    task.source_tag = spec.source_tag;
    std::vector<double> standardized;
    standardized.reserve(spec.descriptor_means.size());
    for (const auto& [name, mean] : spec.descriptor_means) {
      const double sd = spec.descriptor_stdevs.at(name);
      auto shift_it = spec.shift_offset.find(name);
      const double shift = shift_it == spec.shift_offset.end() ? 0.0 : shift_it->second;
      double x = mean + shift + sd * normal(rng);
      if (is_log10_descriptor(name)) x = std::max(x, 0.0);
      task.descriptors[name] = x;
      standardized.push_back((x - mean) / sd);
    }
    std::vector<double> z(spec.latent_dim);
    for (std::size_t r = 0; r < spec.latent_dim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < standardized.size(); ++c) {
        acc += w[r][c] * standardized[c];
      }
      z[r] = acc + spec.latent_noise * normal(rng);
    }
    pop.latents.emplace(task.id, std::move(z));
    pop.tasks.add(std::move(task));
  }
  return pop;
}

Population merge_populations(std::span<const Population> parts) {
  Population out;
  for (const auto& p : parts) {
    for (const auto& t : p.tasks) out.tasks.add(t);
    for (const auto& [id, z] : p.latents) out.latents.emplace(id, z);
  }
  return out;
}

void validate_setup(const SetupModel& setup, std::size_t latent_dim,
                    std::size_t hp_dim) {
  const std::string who = "setup '" + setup.setup_id + "'";
  if (setup.setup_id.empty()) {
    throw Error(ErrorCode::kConfigError, "setup id must be non-empty");
  }
  if (setup.effect_vector.size() != latent_dim) {
    throw Error(ErrorCode::kConfigError,
                who + " effect_vector must have latent_dim entries");
  }
  if (!(setup.noise_std > 0.0)) {
    throw Error(ErrorCode::kConfigError, who + " noise_std must be > 0");
  }
  if (setup.hp_optimum_map.size() != hp_dim ||
      setup.hp_optimum_offset.size() != hp_dim) {
    throw Error(ErrorCode::kConfigError,
                who + " hp_optimum_map/offset must have hp_dim rows");
  }
  for (const auto& row : setup.hp_optimum_map) {
    if (row.size() != latent_dim) {
      throw Error(ErrorCode::kConfigError,
                  who + " hp_optimum_map rows must have latent_dim entries");
    }
  }
}

double mean_quality(std::span<const double> latent, const SetupModel& setup,
                    std::span<const double> hyperparams, double curvature) {
  double dot = 0.0;
  for (std::size_t i = 0; i < latent.size(); ++i) {
    dot += latent[i] * setup.effect_vector[i];
  }
  double bowl = 0.0;
  for (std::size_t j = 0; j < hyperparams.size(); ++j) {
    double opt = setup.hp_optimum_offset[j];
    for (std::size_t i = 0; i < latent.size(); ++i) {
      opt += setup.hp_optimum_map[j][i] * latent[i];
    }
    const double d = hyperparams[j] - opt;
    bowl += d * d;
  }
  return 0.5 + setup.bias + setup.effect_scale * std::tanh(dot) - curvature * bowl;
}

RunStore simulate_runs(const Population& population,
                       std::span<const SetupModel> setups,
                       const SimulationOptions& options) {
  if (options.runs_per == 0) {
    throw Error(ErrorCode::kConfigError, "runs_per must be >= 1");
  }
  if (options.curvature < 0.0) {
    throw Error(ErrorCode::kConfigError, "curvature must be >= 0");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  RunStore store;
  for (const auto& task : population.tasks) {
    const auto& z = population.latents.at(task.id);
    for (const auto& setup : setups) {
      validate_setup(setup, z.size(), options.hp_dim);
      for (std::size_t r = 0; r < options.runs_per; ++r) {
        RunRecord rec;
        rec.task_id = task.id;
        rec.setup_id = setup.setup_id;
        rec.run_index = r;
        rec.hyperparams.resize(options.hp_dim);
        for (double& h : rec.hyperparams) h = unit(rng);
        const double q = mean_quality(z, setup, rec.hyperparams, options.curvature) +
                         setup.noise_std * normal(rng);
        rec.quality = std::clamp(q, 0.0, 1.0);
        store.add(std::move(rec));
      }
    }
  }
  return store;
}

BenchmarkSpec default_benchmark(std::uint64_t seed, double shift,
                                std::size_t n_dev, std::size_t n_prod) {
  constexpr std::size_t kLatentDim = 2;
  constexpr std::size_t kHpDim = 2;
  constexpr double kScale = 0.04;
  BenchmarkSpec spec;

  PopulationSpec base;
  base.descriptor_means = {{"log10_datapoints", 4.0}, {"log10_features", 1.5}};
  base.descriptor_stdevs = {{"log10_datapoints", 1.0}, {"log10_features", 0.5}};
  base.latent_dim = kLatentDim;
  base.latent_noise = 0.1;
  base.latent_map_seed = derive_seed(seed, 0);

  spec.dev = base;
  spec.dev.n_tasks = n_dev;
  spec.dev.id_prefix = "dev_";
  spec.dev.source_tag = "dev";
  spec.dev.seed = derive_seed(seed, 1);

  spec.prod = base;
  spec.prod.n_tasks = n_prod;
  spec.prod.id_prefix = "prod_";
  spec.prod.source_tag = "prod";
  spec.prod.seed = derive_seed(seed, 2);
  if (shift != 0.0) spec.prod.shift_offset = {{"log10_datapoints", shift}};

  std::mt19937_64 rng(derive_seed(seed, 3));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> hp_map(kHpDim, std::vector<double>(kLatentDim));
  for (auto& row : hp_map) {
    for (double& v : row) v = 0.15 * normal(rng);
  }
  auto make = [&](std::string id, double scale) {
    SetupModel s;
    s.setup_id = std::move(id);
    s.effect_vector.resize(kLatentDim);
    for (double& v : s.effect_vector) v = normal(rng);
    s.effect_scale = scale;
    s.hp_optimum_map = hp_map;
    s.hp_optimum_offset.assign(kHpDim, 0.5);
    s.noise_std = 0.02;
    return s;
  };
  spec.setups.push_back(make("default", kScale));
  spec.setups.push_back(make("dnn_only", kScale));
  spec.setups.push_back(make("transfer", kScale));
  spec.setups.push_back(make("new_impl", kScale));
  spec.setups.push_back(make("rf_only", kScale));
  SetupModel compute = spec.setups.front();
  compute.setup_id = "compute_5x";
  compute.bias = 0.25;
  spec.setups.push_back(compute);

  spec.simulation.runs_per = 10;
  spec.simulation.hp_dim = kHpDim;
  spec.simulation.curvature = 0.3;
  spec.simulation.seed = derive_seed(seed, 4);
  return spec;
}

Benchmark build_benchmark(const BenchmarkSpec& spec) {
  const Population parts[] = {generate_population(spec.dev),
                              generate_population(spec.prod)};
  Benchmark b;
  b.population = merge_populations(parts);
  b.runs = simulate_runs(b.population, spec.setups, spec.simulation);
  return b;
}

}  // namespace taskfilter::synth
