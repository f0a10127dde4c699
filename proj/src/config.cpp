#include "taskfilter/config.hpp"

#include <fstream>
#include <set>

#include "taskfilter/errors.hpp"

namespace taskfilter::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    bad(std::string("config field '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  if (!obj[key].is_number_unsigned()) {
    bad(std::string("config field '") + key + "' must be a non-negative integer");
  }
  return obj[key].get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& obj, const char* key) {
  std::vector<std::size_t> out;
  if (!obj.contains(key)) return out;
  if (!obj[key].is_array()) bad(std::string("config field '") + key + "' must be an array");
  for (const auto& v : obj[key]) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
      bad(std::string("config field '") + key + "' must hold positive integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::vector<std::string> get_strings(const json& obj, const char* key) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  if (!obj[key].is_array()) bad(std::string("config field '") + key + "' must be an array");
  for (const auto& v : obj[key]) {
    if (!v.is_string()) bad(std::string("config field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return (base / path).lexically_normal();
  return path;
}

}  // namespace

FilterSpec parse_filter_spec(const json& doc, std::uint64_t default_seed) {
  if (!doc.is_object()) bad("each filter must be an object");
  FilterSpec spec;
  spec.kind = parse_filter_kind(get_or<std::string>(doc, "kind", ""));
  spec.name = get_or<std::string>(doc, "name", "");
  spec.length = get_count(doc, "length", 1);
  if (doc.contains("inner_length")) spec.inner_length = get_count(doc, "inner_length", 1);
  spec.descriptor_keys = get_strings(doc, "descriptor_keys");
  spec.corr = parse_correlation(get_or<std::string>(doc, "corr", "spearman"));
  spec.seed = get_or<std::uint64_t>(doc, "seed", default_seed);
  if (doc.contains("surrogate")) {
    const auto& s = doc["surrogate"];
    spec.surrogate.k = get_count(s, "k", 5);
    if (s.contains("bandwidth") && !s["bandwidth"].is_null()) {
      spec.surrogate.bandwidth = get_or<double>(s, "bandwidth", 1.0);
    }
  }
  validate_filter_spec(spec);
  return spec;
}

ExperimentConfig parse_config(const json& doc,
                              const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);
  cfg.jobs = get_count(doc, "jobs", 1);
  if (cfg.jobs == 0) bad("jobs must be >= 1");
  if (doc.contains("tasks")) cfg.tasks_path = resolve(base_dir, get_or<std::string>(doc, "tasks", ""));
  if (doc.contains("runs")) cfg.runs_path = resolve(base_dir, get_or<std::string>(doc, "runs", ""));
  cfg.out_dir = resolve(base_dir, get_or<std::string>(doc, "out", "out"));

  if (doc.contains("change")) {
    const auto& c = doc["change"];
    cfg.change.baseline_setup = get_or<std::string>(c, "baseline", "");
    cfg.change.modified_setup = get_or<std::string>(c, "modified", "");
  }

  if (doc.contains("epsilon")) {
    const auto& e = doc["epsilon"];
    if (e.is_string() && e.get<std::string>() == "auto") {
      cfg.eps = Epsilon::automatic();
    } else if (e.is_number()) {
      try {
        cfg.eps = Epsilon::fixed(e.get<double>());
      } catch (const Error& err) {
        bad(err.detail());
      }
    } else {
      bad("epsilon must be \"auto\" or a number");
    }
  }

  const auto access = get_or<std::string>(doc, "holdout_access", "full");
  if (access == "full") {
    cfg.access = HoldoutAccess::kFull;
  } else if (access == "descriptor_only") {
    cfg.access = HoldoutAccess::kDescriptorOnly;
  } else {
    bad("holdout_access must be \"full\" or \"descriptor_only\"");
  }
  cfg.oracle_setups = get_strings(doc, "oracle_setups");

  if (doc.contains("partitions")) {
    const auto& p = doc["partitions"];
    cfg.partitions.mode = parse_partition_mode(get_or<std::string>(p, "mode", "random_split"));
    cfg.partitions.train_source = get_or<std::string>(p, "train_source", "");
    cfg.partitions.holdout_size = get_count(p, "holdout_size", 1);
    cfg.partitions.count = get_count(p, "count", 30);
  }

  std::set<std::string> names;
  if (doc.contains("filters")) {
    if (!doc["filters"].is_array()) bad("filters must be an array");
    for (const auto& f : doc["filters"]) {
      auto spec = parse_filter_spec(f, cfg.seed);
      if (!names.insert(spec.label()).second) {
        bad("duplicate filter name '" + spec.label() + "'");
      }
      cfg.filters.push_back(std::move(spec));
    }
  }

  if (doc.contains("contrast")) {
    const auto& c = doc["contrast"];
    ContrastSettings cs;
    cs.new_filter = get_or<std::string>(c, "new", "");
    cs.baseline_filter = get_or<std::string>(c, "baseline", "");
    cfg.contrast = cs;
  }

  if (doc.contains("sweep")) {
    cfg.sweep.lengths = get_counts(doc["sweep"], "lengths");
    cfg.sweep.holdout_sizes = get_counts(doc["sweep"], "holdout_sizes");
  }

  if (doc.contains("eval_change")) {
    const auto& e = doc["eval_change"];
    cfg.bootstrap.sizes = get_counts(e, "bootstrap_sizes");
    cfg.bootstrap.samples = get_count(e, "bootstrap_samples", 100);
  }

  if (doc.contains("simulate")) {
    const auto& s = doc["simulate"];
    cfg.simulate.shift = get_or<double>(s, "shift", cfg.simulate.shift);
    cfg.simulate.n_dev = get_count(s, "n_dev", cfg.simulate.n_dev);
    cfg.simulate.n_prod = get_count(s, "n_prod", cfg.simulate.n_prod);
    cfg.simulate.runs_per = get_count(s, "runs_per", cfg.simulate.runs_per);
    cfg.simulate.curvature = get_or<double>(s, "curvature", cfg.simulate.curvature);
    if (cfg.simulate.runs_per == 0) bad("simulate.runs_per must be >= 1");
  }
  return cfg;
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kConfigError, "cannot open config file " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError,
                "config " + path.string() + " is not valid JSON: " + e.what());
  }
}

EvalOptions ExperimentConfig::eval_options() const {
  EvalOptions o;
  o.access = access;
  o.oracle_setups = oracle_setups;
  o.eps = eps;
  return o;
}

const FilterSpec& ExperimentConfig::filter(const std::string& name) const {
  for (const auto& f : filters) {
    if (f.label() == name) return f;
  }
  throw Error(ErrorCode::kConfigError, "no filter named '" + name + "'");
}

}  // namespace taskfilter::cli
