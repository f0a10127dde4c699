#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "taskfilter/task_model.hpp"

namespace taskfilter::testing {

inline Task make_task(std::string id, DescriptorMap descriptors = {},
                      std::string tag = "dev") {
  return Task{std::move(id), std::move(tag), std::move(descriptors)};
}

// Adds runs 0..n-1 with the given qualities; hyperparams default to the run
// index in every dimension.
inline void add_runs(RunStore& store, const std::string& task,
                     const std::string& setup, const std::vector<double>& q,
                     std::size_t hp_dim = 1) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    store.add(RunRecord{task, setup, i,
                        std::vector<double>(hp_dim, static_cast<double>(i)),
                        q[i]});
  }
}

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("taskfilter_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& body) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace taskfilter::testing
