// Python bindings for the core library, imported as taskfilter._core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "taskfilter/change_eval.hpp"
#include "taskfilter/errors.hpp"
#include "taskfilter/filter_eval.hpp"
#include "taskfilter/filters.hpp"
#include "taskfilter/similarity.hpp"
#include "taskfilter/synth.hpp"
#include "taskfilter/task_model.hpp"

namespace py = pybind11;
using namespace taskfilter;

namespace {

// Spans cannot be cast directly; accept lists and forward.
double improvement_probability_py(const std::vector<double>& b,
                                  const std::vector<double>& m) {
  return improvement_probability(b, m);
}

Epsilon to_epsilon(const std::optional<double>& eps) {
  return eps ? Epsilon::fixed(*eps) : Epsilon::automatic();
}

EvalOptions to_options(bool descriptor_only, const std::vector<std::string>& oracle_setups,
                       const std::optional<double>& eps) {
  EvalOptions o;
  o.access = descriptor_only ? HoldoutAccess::kDescriptorOnly : HoldoutAccess::kFull;
  o.oracle_setups = oracle_setups;
  o.eps = to_epsilon(eps);
  return o;
}

FilterSpec make_filter(const std::string& kind, std::size_t length, const std::string& name,
                       std::vector<std::string> descriptor_keys, const std::string& corr,
                       std::uint64_t seed, std::optional<std::size_t> inner_length) {
  FilterSpec s;
  s.kind = parse_filter_kind(kind);
  s.length = length;
  s.name = name;
  s.descriptor_keys = std::move(descriptor_keys);
  s.corr = parse_correlation(corr);
  s.seed = seed;
  s.inner_length = inner_length;
  validate_filter_spec(s);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Task selection and AutoML change evaluation";

  static py::exception<Error> error_type(m, "TaskfilterError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      exc.attr("is_validation") = is_validation_error(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Task>(m, "Task")
      .def(py::init([](std::string id, std::string tag, DescriptorMap d) {
             Task t{std::move(id), std::move(tag), std::move(d)};
             validate_task(t);
             return t;
           }),
           py::arg("id"), py::arg("source_tag") = "", py::arg("descriptors") = DescriptorMap{})
      .def_readonly("id", &Task::id)
      .def_readonly("source_tag", &Task::source_tag)
      .def_readonly("descriptors", &Task::descriptors)
      .def("__repr__", [](const Task& t) { return "<Task " + t.id + ">"; });

  py::class_<TaskSet>(m, "TaskSet")
      .def(py::init<>())
      .def(py::init<std::vector<Task>>())
      .def("add", &TaskSet::add)
      .def("ids", &TaskSet::ids)
      .def("at", &TaskSet::at, py::return_value_policy::copy)
      .def("__contains__", &TaskSet::contains)
      .def("__len__", &TaskSet::size)
      .def("__getitem__",
           [](const TaskSet& s, std::size_t i) {
             if (i >= s.size()) throw py::index_error();
             return s[i];
           })
      .def("subset", [](const TaskSet& s, const std::vector<std::string>& ids) {
        return s.subset(ids);
      })
      .def("__eq__", &TaskSet::operator==);

  py::class_<RunRecord>(m, "RunRecord")
      .def(py::init([](std::string task, std::string setup, std::uint64_t idx,
                       std::vector<double> hp, double q) {
             return RunRecord{std::move(task), std::move(setup), idx, std::move(hp), q};
           }),
           py::arg("task_id"), py::arg("setup_id"), py::arg("run_index"),
           py::arg("hyperparams"), py::arg("quality"))
      .def_readonly("task_id", &RunRecord::task_id)
      .def_readonly("setup_id", &RunRecord::setup_id)
      .def_readonly("run_index", &RunRecord::run_index)
      .def_readonly("hyperparams", &RunRecord::hyperparams)
      .def_readonly("quality", &RunRecord::quality);

  py::class_<RunStore>(m, "RunStore")
      .def(py::init<>())
      .def("add", &RunStore::add)
      .def("has", &RunStore::has)
      .def("qualities", &RunStore::qualities)
      .def("runs", &RunStore::runs, py::return_value_policy::copy)
      .def("setups", &RunStore::setups)
      .def_property_readonly("hp_dim", &RunStore::hp_dim)
      .def("__len__", &RunStore::size)
      .def("__eq__", &RunStore::operator==);

  py::class_<Change>(m, "Change")
      .def(py::init<std::string, std::string>(), py::arg("baseline"), py::arg("modified"))
      .def_readonly("baseline_setup", &Change::baseline_setup)
      .def_readonly("modified_setup", &Change::modified_setup);

  m.def("ingest_tasks", [](const std::filesystem::path& p) { return ingest_tasks(p); });
  m.def("ingest_runs", [](const std::filesystem::path& p, const TaskSet& t) {
    return ingest_runs(p, t);
  });
  m.def("write_tasks", py::overload_cast<const std::filesystem::path&, const TaskSet&>(
                           &write_tasks));
  m.def("write_runs", py::overload_cast<const std::filesystem::path&, const RunStore&>(
                          &write_runs));

  m.def("improvement_probability", &improvement_probability_py, py::arg("baseline"),
        py::arg("modified"));
  m.def("logit", &logit);
  m.def("expit", &expit);

  py::class_<ImprovementReport>(m, "ImprovementReport")
      .def_readonly("per_task", &ImprovementReport::per_task)
      .def_readonly("raw_per_task", &ImprovementReport::raw_per_task)
      .def_readonly("eps_used", &ImprovementReport::eps_used)
      .def_readonly("aggregate", &ImprovementReport::aggregate);
  m.def(
      "eval_system_change",
      [](const TaskSet& tasks, const Change& change, const RunStore& store,
         std::optional<double> eps) {
        return eval_system_change(tasks, change, store, to_epsilon(eps));
      },
      py::arg("tasks"), py::arg("change"), py::arg("store"), py::arg("eps") = py::none());

  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
    return spearman(x, y);
  });
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  });
  m.def(
      "descriptor_similarity",
      [](const TaskSet& train, const Task& holdout, const std::vector<std::string>& keys) {
        return descriptor_similarity(train, holdout, keys).values;
      },
      py::arg("train"), py::arg("holdout"), py::arg("keys"));
  m.def(
      "oracle_similarity",
      [](const TaskSet& train, const std::string& holdout, const std::vector<std::string>& setups,
         const RunStore& store) {
        return oracle_similarity(train, holdout, setups, store).values;
      },
      py::arg("train"), py::arg("holdout_id"), py::arg("setups"), py::arg("store"));

  py::class_<FilterSpec>(m, "FilterSpec")
      .def(py::init(&make_filter), py::arg("kind"), py::arg("length") = 1,
           py::arg("name") = "", py::arg("descriptor_keys") = std::vector<std::string>{},
           py::arg("corr") = "spearman", py::arg("seed") = 0,
           py::arg("inner_length") = py::none())
      .def_property_readonly("label", &FilterSpec::label)
      .def_readonly("length", &FilterSpec::length)
      .def_readonly("seed", &FilterSpec::seed);

  m.def("filter_log_loss", &filter_log_loss, py::arg("y"), py::arg("t"));

  py::class_<Partition>(m, "Partition")
      .def_readonly("train_ids", &Partition::train_ids)
      .def_readonly("holdout_ids", &Partition::holdout_ids);
  py::class_<PartitionPlan>(m, "PartitionPlan")
      .def_readonly("partitions", &PartitionPlan::partitions)
      .def_readonly("seed", &PartitionPlan::seed);
  m.def(
      "sample_partitions",
      [](const TaskSet& tasks, const std::string& mode, std::size_t holdout_size,
         std::size_t count, std::uint64_t seed, const std::string& train_source) {
        return sample_partitions(tasks, parse_partition_mode(mode), holdout_size, count, seed,
                                 train_source);
      },
      py::arg("tasks"), py::arg("mode"), py::arg("holdout_size"), py::arg("count"),
      py::arg("seed"), py::arg("train_source") = "");

  py::class_<FilterLossRecord>(m, "FilterLossRecord")
      .def_readonly("partition_index", &FilterLossRecord::partition_index)
      .def_readonly("filter", &FilterLossRecord::filter)
      .def_readonly("y", &FilterLossRecord::y)
      .def_readonly("t", &FilterLossRecord::t)
      .def_readonly("log_loss", &FilterLossRecord::log_loss)
      .def_readonly("filtered_count", &FilterLossRecord::filtered_count);
  m.def(
      "eval_filter_over_plan",
      [](const FilterSpec& f, const TaskSet& tasks, const PartitionPlan& plan,
         const Change& change, const RunStore& store, bool descriptor_only,
         const std::vector<std::string>& oracle_setups, std::optional<double> eps) {
        return eval_filter_over_plan(f, tasks, plan, change, store,
                                     to_options(descriptor_only, oracle_setups, eps));
      },
      py::arg("filter"), py::arg("tasks"), py::arg("plan"), py::arg("change"),
      py::arg("store"), py::arg("descriptor_only") = false,
      py::arg("oracle_setups") = std::vector<std::string>{}, py::arg("eps") = py::none());

  py::class_<WelchResult>(m, "WelchResult")
      .def_readonly("t_statistic", &WelchResult::t_statistic)
      .def_readonly("dof", &WelchResult::dof)
      .def_readonly("p_value", &WelchResult::p_value);
  m.def("welch_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    return welch_t_test(a, b);
  });

  py::class_<ContrastSummary>(m, "ContrastSummary")
      .def_readonly("new_filter", &ContrastSummary::new_filter)
      .def_readonly("baseline_filter", &ContrastSummary::baseline_filter)
      .def_readonly("new_records", &ContrastSummary::new_records)
      .def_readonly("baseline_records", &ContrastSummary::baseline_records)
      .def_readonly("mean_new", &ContrastSummary::mean_new)
      .def_readonly("mean_baseline", &ContrastSummary::mean_baseline)
      .def_readonly("mean_diff", &ContrastSummary::mean_diff)
      .def_readonly("p_value", &ContrastSummary::p_value)
      .def_readonly("significant", &ContrastSummary::significant);
  m.def(
      "contrast_filters",
      [](const FilterSpec& a, const FilterSpec& b, const Change& change,
         const PartitionPlan& plan, const TaskSet& tasks, const RunStore& store,
         bool descriptor_only, const std::vector<std::string>& oracle_setups,
         std::optional<double> eps) {
        return contrast_filters(a, b, change, plan, tasks, store,
                                to_options(descriptor_only, oracle_setups, eps));
      },
      py::arg("new_filter"), py::arg("baseline_filter"), py::arg("change"), py::arg("plan"),
      py::arg("tasks"), py::arg("store"), py::arg("descriptor_only") = false,
      py::arg("oracle_setups") = std::vector<std::string>{}, py::arg("eps") = py::none());

  m.def(
      "simulate_benchmark",
      [](std::uint64_t seed, double shift, std::size_t n_dev, std::size_t n_prod,
         std::size_t runs_per) {
        auto spec = synth::default_benchmark(seed, shift, n_dev, n_prod);
        spec.simulation.runs_per = runs_per;
        auto b = synth::build_benchmark(spec);
        return py::make_tuple(std::move(b.population.tasks), std::move(b.runs));
      },
      py::arg("seed"), py::arg("shift") = 2.0, py::arg("n_dev") = 12, py::arg("n_prod") = 18,
      py::arg("runs_per") = 10,
      "Synthetic dev/prod benchmark; returns (TaskSet, RunStore).");
}
