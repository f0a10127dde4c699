#pragma once

// Tasks, run records and the stores that hold them.
//
// Task files are JSON Lines: one object per line with `id`, `source_tag` and a
// `descriptors` object mapping descriptor names to numbers. Run files are CSV
// with the header `task_id,setup_id,run_index,quality,h_0,...,h_{d-1}`.
//
// Both containers are immutable once ingested and safe for concurrent reads.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace taskfilter {

using DescriptorMap = std::map<std::string, double>;

struct Task {
  std::string id;
  std::string source_tag;
  DescriptorMap descriptors;

  bool operator==(const Task&) const = default;
};

// True for count-like descriptor names (`*_log10` or `log10_*`), which are
// stored already log10-transformed.
bool is_log10_descriptor(const std::string& name);

// log10 of a raw count; throws InvalidDescriptor when count < 1.
double log10_count(double raw_count);

// Throws InvalidDescriptor for non-finite values or negative log10 counts.
void validate_task(const Task& task);

// Insertion-ordered collection of uniquely identified tasks.
class TaskSet {
 public:
  TaskSet() = default;
  explicit TaskSet(std::vector<Task> tasks);

  void add(Task task);

  std::size_t size() const noexcept { return tasks_.size(); }
  bool empty() const noexcept { return tasks_.empty(); }
  const Task& operator[](std::size_t i) const { return tasks_[i]; }
  const Task& at(const std::string& id) const;
  const Task* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }

  auto begin() const { return tasks_.begin(); }
  auto end() const { return tasks_.end(); }
  const std::vector<Task>& tasks() const noexcept { return tasks_; }
  std::vector<std::string> ids() const;

  // Tasks named by `ids`, in that order.
  TaskSet subset(std::span<const std::string> ids) const;

  bool operator==(const TaskSet& other) const { return tasks_ == other.tasks_; }

 private:
  std::vector<Task> tasks_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RunRecord {
  std::string task_id;
  std::string setup_id;
  std::uint64_t run_index = 0;
  std::vector<double> hyperparams;
  double quality = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct Change {
  std::string baseline_setup;
  std::string modified_setup;
};

// Runs keyed by (task_id, setup_id), each key's runs sorted by run_index.
class RunStore {
 public:
  using Key = std::pair<std::string, std::string>;

  RunStore() = default;

  // Validates quality range, hyperparameter arity and key uniqueness.
  void add(RunRecord record);

  bool has(const std::string& task_id, const std::string& setup_id) const;

  // Throws NoRuns when the key is absent.
  const std::vector<RunRecord>& runs(const std::string& task_id,
                                     const std::string& setup_id) const;

  // Throws NoRuns when the key is absent.
  std::vector<double> qualities(const std::string& task_id,
                                const std::string& setup_id) const;

  // Sorted, de-duplicated setup ids present in the store.
  std::vector<std::string> setups() const;

  std::size_t hp_dim() const noexcept { return hp_dim_; }
  std::size_t size() const noexcept { return n_runs_; }
  std::size_t key_count() const noexcept { return by_key_.size(); }
  const std::map<Key, std::vector<RunRecord>>& entries() const noexcept {
    return by_key_;
  }

  bool operator==(const RunStore& other) const {
    return by_key_ == other.by_key_;
  }

 private:
  std::map<Key, std::vector<RunRecord>> by_key_;
  std::size_t hp_dim_ = 0;
  bool hp_dim_set_ = false;
  std::size_t n_runs_ = 0;
};

// Shortest round-trip decimal representation.
std::string format_double(double value);

TaskSet read_tasks(std::istream& in);
TaskSet ingest_tasks(const std::filesystem::path& path);
void write_tasks(std::ostream& out, const TaskSet& tasks);
void write_tasks(const std::filesystem::path& path, const TaskSet& tasks);

RunStore read_runs(std::istream& in, const TaskSet& tasks);
RunStore ingest_runs(const std::filesystem::path& path, const TaskSet& tasks);
void write_runs(std::ostream& out, const RunStore& store);
void write_runs(const std::filesystem::path& path, const RunStore& store);

std::vector<double> query_qualities(const RunStore& store,
                                    const std::string& task_id,
                                    const std::string& setup_id);

}  // namespace taskfilter
