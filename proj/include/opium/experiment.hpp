#pragma once

#include "opium/datasets.hpp"
#include "opium/elm.hpp"
#include "opium/solvers.hpp"
#include "opium/tasks.hpp"
#include "opium/trace.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opium {

enum class TaskKind {
    sine_switch,
    csv_series,
    idx_classify,
    random_equivalence,
};

const char* to_string(TaskKind kind) noexcept;
std::optional<TaskKind> parse_task_kind(std::string_view name) noexcept;

/// Complete configuration of an experiment. Unset optionals take task
/// defaults (see effective_*).
struct RunSpec {
    TaskKind task = TaskKind::sine_switch;
    std::vector<SolverKind> solvers{SolverKind::opium};

    std::optional<double> epsilon;
    double g = defaults::g;
    double alpha = defaults::alpha;
    double c_tol = defaults::c_tol;

    std::size_t hidden = 100;
    std::uint64_t seed = 1;
    std::size_t repeats = 1;
    std::size_t threads = 1;

    std::optional<Activation> activation;
    std::optional<WeightDistribution> weights;

    // sine-switch
    SineTaskConfig sine;
    // csv-series (empty csv path: bundled synthetic ECG)
    std::string csv;
    std::size_t series_taps = 10;
    std::size_t ecg_samples = 5000;
    // idx-classify
    std::string images;
    std::string labels;
    std::string test_images;
    std::string test_labels;
    std::size_t train_limit = 0; // 0: all
    std::size_t test_limit = 0;  // 0: all
    // random-equivalence
    std::size_t samples = 500;
    std::size_t input_dim = 10;
    std::size_t outputs = 3;

    std::size_t metric_window = 1000;
    std::string trace_out;
    bool trace_timings = false;

    SolverKind solver() const { return solvers.at(0); }

    double effective_epsilon() const;
    Activation effective_activation() const;
    WeightDistribution effective_weights(std::size_t input_dim) const;

    /// Throws Errc::invalid_argument with an actionable message.
    void validate() const;

    nlohmann::json to_json() const;
};

/// Task data shared by all runs of a spec (loaded files, generated streams).
struct TaskData {
    TaskKind task = TaskKind::sine_switch;
    std::vector<TaskSample> stream; // regression tasks
    LabeledDataset train;           // idx-classify
    LabeledDataset test;            // idx-classify
    std::string source;             // human-readable provenance of the data

    std::size_t input_dim() const;
    std::size_t output_dim() const;
};

TaskData prepare_task(const RunSpec& spec);

/// One run with spec.solver() and `seed` (hidden layer and any sampling).
/// When spec.trace_out is set the trace is written to trace_path(spec, seed).
RunTrace run_experiment(const RunSpec& spec, const TaskData& data, std::uint64_t seed);
RunTrace run_experiment(const RunSpec& spec);

struct RepeatedRuns {
    SolverKind solver = SolverKind::opium;
    std::vector<RunTrace> runs; // seeds spec.seed .. spec.seed + repeats - 1
    std::map<std::string, double> mean_metrics;
};

/// Runs spec.solver() over spec.repeats seeds, on spec.threads workers.
RepeatedRuns run_repeated(const RunSpec& spec, const TaskData& data);

struct Comparison {
    std::vector<RepeatedRuns> per_solver;
    std::string primary_metric;
    /// ||W_i - W_j||_F / ||W_j||_F on the first seed, keyed "i/j".
    std::map<std::string, double> weight_differences;
};

/// Runs every solver in spec.solvers on identical streams and seeds.
Comparison run_comparison(const RunSpec& spec, const TaskData& data);

/// The headline metric for a task: test error for classification,
/// final-window RMS otherwise.
std::string primary_metric(TaskKind task);

std::string trace_path(const RunSpec& spec, SolverKind solver, std::uint64_t seed);

/// Builds the hidden layer a run with `seed` uses.
HiddenLayer make_hidden_layer(const RunSpec& spec, std::size_t input_dim, std::uint64_t seed);

AnySolver make_solver(const RunSpec& spec, SolverKind kind, std::size_t m, std::size_t n);

} // namespace opium
