#include "taskfilter/task_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "taskfilter/errors.hpp"

namespace taskfilter {

namespace {

using json = nlohmann::ordered_json;

std::string line_context(std::size_t line_no) {
  return "line " + std::to_string(line_no);
}

double parse_double(std::string_view text, std::size_t line_no,
                    std::string_view field) {
  // strtod accepts "nan"/"inf" spellings, which from_chars also does; the
  // caller decides whether non-finite values are acceptable.
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && *first == ' ') ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error(ErrorCode::kParseError,
                line_context(line_no) + ": field '" + std::string(field) +
                    "' is not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

}  // namespace

bool is_log10_descriptor(const std::string& name) {
  constexpr std::string_view suffix = "_log10";
  constexpr std::string_view prefix = "log10_";
  return (name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) ==
              0) ||
         (name.size() > prefix.size() &&
          name.compare(0, prefix.size(), prefix) == 0);
}

double log10_count(double raw_count) {
  if (!std::isfinite(raw_count) || raw_count < 1.0) {
    throw Error(ErrorCode::kInvalidDescriptor,
                "raw count must be >= 1 before log10 transform, got " +
                    format_double(raw_count));
  }
  return std::log10(raw_count);
}

void validate_task(const Task& task) {
  if (task.id.empty() || task.id.find_first_of(",\r\n") != std::string::npos) {
    throw Error(ErrorCode::kParseError,
                "task id must be non-empty and free of commas and newlines");
  }
  for (const auto& [name, value] : task.descriptors) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidDescriptor,
                  "task '" + task.id + "' descriptor '" + name +
                      "' is not finite");
    }
    if (is_log10_descriptor(name) && value < 0.0) {
      throw Error(ErrorCode::kInvalidDescriptor,
                  "task '" + task.id + "' descriptor '" + name +
                      "' is a log10 count below 0 (raw count < 1)");
    }
  }
}

// ---------------------------------------------------------------- TaskSet

TaskSet::TaskSet(std::vector<Task> tasks) {
  tasks_.reserve(tasks.size());
  for (auto& t : tasks) add(std::move(t));
}

void TaskSet::add(Task task) {
  validate_task(task);
  if (index_.count(task.id) != 0) {
    throw Error(ErrorCode::kDuplicateTask, "duplicate task id '" + task.id + "'");
  }
  index_.emplace(task.id, tasks_.size());
  tasks_.push_back(std::move(task));
}

const Task* TaskSet::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &tasks_[it->second];
}

const Task& TaskSet::at(const std::string& id) const {
  const Task* t = find(id);
  if (t == nullptr) {
    throw Error(ErrorCode::kUnknownTask, "unknown task id '" + id + "'");
  }
  return *t;
}

std::vector<std::string> TaskSet::ids() const {
  std::vector<std::string> out;
  out.reserve(tasks_.size());
  for (const auto& t : tasks_) out.push_back(t.id);
  return out;
}

TaskSet TaskSet::subset(std::span<const std::string> ids) const {
  TaskSet out;
  for (const auto& id : ids) out.add(at(id));
  return out;
}

// --------------------------------------------------------------- RunStore

void RunStore::add(RunRecord record) {
  if (!std::isfinite(record.quality) || record.quality < 0.0 ||
      record.quality > 1.0) {
    throw Error(ErrorCode::kInvalidQuality,
                "quality " + format_double(record.quality) + " for task '" +
                    record.task_id + "' setup '" + record.setup_id +
                    "' is outside [0,1]");
  }
  if (record.setup_id.empty() ||
      record.setup_id.find_first_of(",\r\n") != std::string::npos) {
    throw Error(ErrorCode::kParseError,
                "setup id must be non-empty and free of commas and newlines");
  }
  for (double h : record.hyperparams) {
    if (!std::isfinite(h)) {
      throw Error(ErrorCode::kParseError,
                  "non-finite hyperparameter for task '" + record.task_id + "'");
    }
  }
  if (!hp_dim_set_) {
    hp_dim_ = record.hyperparams.size();
    hp_dim_set_ = true;
  } else if (record.hyperparams.size() != hp_dim_) {
    throw Error(ErrorCode::kArityMismatch,
                "expected " + std::to_string(hp_dim_) +
                    " hyperparameters, got " +
                    std::to_string(record.hyperparams.size()));
  }
  auto& bucket = by_key_[{record.task_id, record.setup_id}];
  auto pos = std::lower_bound(
      bucket.begin(), bucket.end(), record.run_index,
      [](const RunRecord& r, std::uint64_t idx) { return r.run_index < idx; });
  if (pos != bucket.end() && pos->run_index == record.run_index) {
    throw Error(ErrorCode::kDuplicateRun,
                "duplicate run (" + record.task_id + ", " + record.setup_id +
                    ", " + std::to_string(record.run_index) + ")");
  }
  bucket.insert(pos, std::move(record));
  ++n_runs_;
}

bool RunStore::has(const std::string& task_id,
                   const std::string& setup_id) const {
  return by_key_.count({task_id, setup_id}) != 0;
}

const std::vector<RunRecord>& RunStore::runs(const std::string& task_id,
                                             const std::string& setup_id) const {
  auto it = by_key_.find({task_id, setup_id});
  if (it == by_key_.end()) {
    throw Error(ErrorCode::kNoRuns,
                "no runs for task '" + task_id + "' under setup '" + setup_id +
                    "'");
  }
  return it->second;
}

std::vector<double> RunStore::qualities(const std::string& task_id,
                                        const std::string& setup_id) const {
  const auto& rs = runs(task_id, setup_id);
  std::vector<double> out;
  out.reserve(rs.size());
  for (const auto& r : rs) out.push_back(r.quality);
  return out;
}

std::vector<std::string> RunStore::setups() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : by_key_) out.push_back(key.second);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> query_qualities(const RunStore& store,
                                    const std::string& task_id,
                                    const std::string& setup_id) {
  return store.qualities(task_id, setup_id);
}

// ------------------------------------------------------------------- I/O

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

TaskSet read_tasks(std::istream& in) {
  TaskSet tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError,
                  line_context(line_no) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("descriptors") || !rec["descriptors"].is_object()) {
      throw Error(ErrorCode::kParseError,
                  line_context(line_no) +
                      ": expected an object with string 'id' and object "
                      "'descriptors'");
    }
    Task task;
    task.id = rec["id"].get<std::string>();
    if (rec.contains("source_tag")) {
      if (!rec["source_tag"].is_string()) {
        throw Error(ErrorCode::kParseError,
                    line_context(line_no) + ": 'source_tag' must be a string");
      }
      task.source_tag = rec["source_tag"].get<std::string>();
    }
    for (const auto& [name, value] : rec["descriptors"].items()) {
      double v = 0.0;
      if (value.is_number()) {
        v = value.get<double>();
      } else if (value.is_string()) {
        // Non-finite values cannot be JSON numbers; accept their string
        // spelling so they are reported as invalid descriptors.
        v = parse_double(value.get<std::string>(), line_no, name);
      } else {
        throw Error(ErrorCode::kParseError,
                    line_context(line_no) + ": descriptor '" + name +
                        "' must be a number");
      }
      task.descriptors[name] = v;
    }
    try {
      tasks.add(std::move(task));
    } catch (const Error& e) {
      throw Error(e.code(), line_context(line_no) + ": " +
                                e.detail());
    }
  }
  return tasks;
}

TaskSet ingest_tasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open task file " + path.string());
  }
  return read_tasks(in);
}

void write_tasks(std::ostream& out, const TaskSet& tasks) {
  for (const auto& t : tasks) {
    // Hand-rolled so that numbers use the same shortest round-trip form as
    // the run CSV writer.
    json id = t.id;
    json tag = t.source_tag;
    out << "{\"id\":" << id.dump() << ",\"source_tag\":" << tag.dump()
        << ",\"descriptors\":{";
    bool first = true;
    for (const auto& [name, value] : t.descriptors) {
      if (!first) out << ',';
      first = false;
      out << json(name).dump() << ':' << format_double(value);
    }
    out << "}}\n";
  }
}

void write_tasks(const std::filesystem::path& path, const TaskSet& tasks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write task file " + path.string());
  }
  write_tasks(out, tasks);
}

RunStore read_runs(std::istream& in, const TaskSet& tasks) {
  RunStore store;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParseError, "line 1: missing header");
  }
  auto header = split_csv(trim_cr(line));
  const char* fixed[] = {"task_id", "setup_id", "run_index", "quality"};
  if (header.size() < 4) {
    throw Error(ErrorCode::kParseError, "line 1: header too short");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != fixed[i]) {
      throw Error(ErrorCode::kParseError,
                  "line 1: expected column '" + std::string(fixed[i]) +
                      "', got '" + std::string(header[i]) + "'");
    }
  }
  const std::size_t hp_dim = header.size() - 4;
  for (std::size_t j = 0; j < hp_dim; ++j) {
    if (header[4 + j] != "h_" + std::to_string(j)) {
      throw Error(ErrorCode::kParseError,
                  "line 1: expected column 'h_" + std::to_string(j) +
                      "', got '" + std::string(header[4 + j]) + "'");
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto fields = split_csv(trim_cr(line));
    if (fields.size() < 4) {
      throw Error(ErrorCode::kParseError,
                  line_context(line_no) + ": expected at least 4 fields");
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kArityMismatch,
                  line_context(line_no) + ": expected " +
                      std::to_string(hp_dim) + " hyperparameters, got " +
                      std::to_string(fields.size() - 4));
    }
    RunRecord r;
    r.task_id = std::string(fields[0]);
    r.setup_id = std::string(fields[1]);
    {
      auto f = fields[2];
      auto [ptr, ec] =
          std::from_chars(f.data(), f.data() + f.size(), r.run_index);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
        throw Error(ErrorCode::kParseError,
                    line_context(line_no) + ": bad run_index '" +
                        std::string(f) + "'");
      }
    }
    r.quality = parse_double(fields[3], line_no, "quality");
    r.hyperparams.reserve(hp_dim);
    for (std::size_t j = 0; j < hp_dim; ++j) {
      r.hyperparams.push_back(
          parse_double(fields[4 + j], line_no, "h_" + std::to_string(j)));
    }
    if (r.task_id.empty() || r.setup_id.empty()) {
      throw Error(ErrorCode::kParseError,
                  line_context(line_no) + ": empty task_id or setup_id");
    }
    if (!tasks.contains(r.task_id)) {
      throw Error(ErrorCode::kUnknownTask,
                  line_context(line_no) + ": unknown task id '" + r.task_id +
                      "'");
    }
    try {
      store.add(std::move(r));
    } catch (const Error& e) {
      throw Error(e.code(), line_context(line_no) + ": " +
                                e.detail());
    }
  }
  return store;
}

RunStore ingest_runs(const std::filesystem::path& path, const TaskSet& tasks) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open run file " + path.string());
  }
  return read_runs(in, tasks);
}

void write_runs(std::ostream& out, const RunStore& store) {
  out << "task_id,setup_id,run_index,quality";
  for (std::size_t j = 0; j < store.hp_dim(); ++j) out << ",h_" << j;
  out << '\n';
  for (const auto& [key, runs] : store.entries()) {
    for (const auto& r : runs) {
      out << r.task_id << ',' << r.setup_id << ',' << r.run_index << ','
          << format_double(r.quality);
      for (double h : r.hyperparams) out << ',' << format_double(h);
      out << '\n';
    }
  }
}

void write_runs(const std::filesystem::path& path, const RunStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write run file " + path.string());
  }
  write_runs(out, store);
}

}  // namespace taskfilter
