#include "opium/experiment.hpp"

#include "opium/error.hpp"
#include "opium/kernels.hpp"
#include "opium/metrics.hpp"
#include "opium/prng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace opium {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json weights_to_json(const WeightDistribution& w)
{
    if (w.kind == WeightDistribution::Kind::uniform)
        return {{"kind", "uniform"}, {"lo", w.a}, {"hi", w.b}};
    return {{"kind", "normal"}, {"mean", w.a}, {"sd", w.b}};
}

/// Random order of `count` indices out of [0, n), via a partial Fisher-Yates
/// shuffle.
std::vector<std::size_t> draw_indices(std::size_t n, std::size_t count, std::uint64_t seed)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed ^ 0xd1b54a32d192ed03ULL);
    count = std::min(count, n);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

void add_theta_metrics(const AnySolver& solver, std::map<std::string, double>& metrics)
{
    const Matrix* theta = theta_of(solver);
    if (!theta || theta->rows() == 0)
        return;
    double min_diag = (*theta)(0, 0);
    double max_diag = (*theta)(0, 0);
    double max_off = 0.0;
    for (std::size_t r = 0; r < theta->rows(); ++r) {
        min_diag = std::min(min_diag, (*theta)(r, r));
        max_diag = std::max(max_diag, (*theta)(r, r));
        for (std::size_t c = 0; c < theta->cols(); ++c)
            if (r != c)
                max_off = std::max(max_off, std::abs((*theta)(r, c)));
    }
    metrics["theta_min_diag"] = min_diag;
    metrics["theta_max_diag"] = max_diag;
    metrics["theta_offdiag_ratio"] = min_diag != 0.0 ? max_off / std::abs(min_diag) : INFINITY;
}

class RecordSink {
public:
    RecordSink(const RunSpec& spec, SolverKind solver, std::uint64_t seed, const json& config)
    {
        if (!spec.trace_out.empty())
            writer_.emplace(trace_path(spec, solver, seed), config);
    }

    void push(RunTrace& trace, StepRecord record)
    {
        if (writer_)
            writer_->write(record);
        trace.records.push_back(std::move(record));
    }

    void finish(const RunTrace& trace, bool timings)
    {
        if (writer_)
            writer_->finish(trace.metrics, timings ? std::optional<Timings>(trace.timings) : std::nullopt);
    }

private:
    std::optional<TraceWriter> writer_;
};

// Streams stored samples through the hidden layer and the solver.
RunTrace run_regression(const RunSpec& spec, SolverKind kind, const TaskData& data, std::uint64_t seed,
                        const json& config)
{
    const auto t0 = Clock::now();
    const std::size_t n_out = data.output_dim();
    const HiddenLayer layer = make_hidden_layer(spec, data.input_dim(), seed);
    const std::size_t m = layer.hidden_dim();

    RunTrace trace;
    trace.config = config;
    RecordSink sink(spec, kind, seed, config);
    trace.records.reserve(data.stream.size());

    const bool keep_activations = kind == SolverKind::batch || spec.task == TaskKind::random_equivalence;
    Matrix acts;
    Matrix targets;
    if (keep_activations) {
        acts = Matrix(m, data.stream.size());
        targets = Matrix(n_out, data.stream.size());
    }

    Vector a(m);
    std::vector<double> errors;
    errors.reserve(data.stream.size());

    if (kind == SolverKind::batch) {
        for (std::size_t i = 0; i < data.stream.size(); ++i) {
            hidden_activation_into(layer, data.stream[i].input, a);
            acts.set_col(i, a);
            targets.set_col(i, data.stream[i].target);
        }
        trace.final_weights = batch_solve_regularized(acts, targets, spec.effective_epsilon());
        for (std::size_t i = 0; i < data.stream.size(); ++i) {
            const auto& s = data.stream[i];
            StepRecord r{i + 1, s.target, matvec(trace.final_weights, acts.col(i)), 0.0};
            r.error = step_error(r.target, r.prediction);
            errors.push_back(r.error);
            sink.push(trace, std::move(r));
        }
        trace.metrics["in_sample"] = 1.0;
    } else {
        AnySolver solver = make_solver(spec, kind, m, n_out);
        for (std::size_t i = 0; i < data.stream.size(); ++i) {
            const auto& s = data.stream[i];
            hidden_activation_into(layer, s.input, a);
            StepRecord r{i + 1, s.target, predict(solver, a), 0.0};
            r.error = step_error(r.target, r.prediction);
            errors.push_back(r.error);
            sink.push(trace, std::move(r));
            try {
                update(solver, a, s.target);
            } catch (const Error& e) {
                fail(e.code(), std::string(e.what()) + " [solver " + to_string(kind) + ", seed " + std::to_string(seed) +
                                   ", step " + std::to_string(i + 1) + "]");
            }
            if (keep_activations) {
                acts.set_col(i, a);
                targets.set_col(i, s.target);
            }
        }
        trace.final_weights = weights(solver);
        trace.metrics["state_bytes"] = static_cast<double>(state_bytes(solver));
        trace.metrics["analytic_bytes"] = static_cast<double>(analytic_bytes(solver));
        add_theta_metrics(solver, trace.metrics);
        if (spec.task == TaskKind::random_equivalence) {
            const Matrix oracle = kind == SolverKind::greville
                                      ? batch_solve(acts, targets)
                                      : batch_solve_regularized(acts, targets, spec.effective_epsilon());
            trace.metrics["batch_rel_diff"] = relative_frobenius(trace.final_weights, oracle);
        }
    }

    trace.timings.train_seconds = seconds_since(t0);
    trace.metrics["updates"] = static_cast<double>(errors.size());
    if (!errors.empty()) {
        trace.metrics["rms_final"] = rms(errors, std::min(spec.metric_window, errors.size()));
        trace.metrics["rms_all"] = rms(errors, errors.size());
    }
    trace.timings.total_seconds = seconds_since(t0);
    sink.finish(trace, spec.trace_timings);
    return trace;
}

RunTrace run_classification(const RunSpec& spec, SolverKind kind, const TaskData& data, std::uint64_t seed,
                            const json& config)
{
    const auto t0 = Clock::now();
    const std::size_t classes = data.train.num_classes;
    const HiddenLayer layer = make_hidden_layer(spec, data.input_dim(), seed);
    const std::size_t m = layer.hidden_dim();
    const auto order = draw_indices(data.train.size(), spec.train_limit ? spec.train_limit : data.train.size(), seed);

    RunTrace trace;
    trace.config = config;
    RecordSink sink(spec, kind, seed, config);
    trace.records.reserve(order.size());

    Vector a(m);
    std::size_t online_wrong = 0;

    if (kind == SolverKind::batch) {
        Matrix acts(m, order.size());
        Matrix targets(classes, order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            hidden_activation_into(layer, data.train.sample(order[i]), a);
            acts.set_col(i, a);
            targets.set_col(i, one_hot(data.train.labels[order[i]], classes));
        }
        trace.final_weights = batch_solve_regularized(acts, targets, spec.effective_epsilon());
        for (std::size_t i = 0; i < order.size(); ++i) {
            StepRecord r{i + 1, targets.col(i), matvec(trace.final_weights, acts.col(i)), 0.0};
            r.error = step_error(r.target, r.prediction);
            if (static_cast<int>(argmax(r.prediction)) != data.train.labels[order[i]])
                ++online_wrong;
            sink.push(trace, std::move(r));
        }
        trace.metrics["in_sample"] = 1.0;
    } else {
        AnySolver solver = make_solver(spec, kind, m, classes);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const int label = data.train.labels[order[i]];
            hidden_activation_into(layer, data.train.sample(order[i]), a);
            StepRecord r{i + 1, one_hot(label, classes), predict(solver, a), 0.0};
            r.error = step_error(r.target, r.prediction);
            if (static_cast<int>(argmax(r.prediction)) != label)
                ++online_wrong;
            try {
                update(solver, a, r.target);
            } catch (const Error& e) {
                fail(e.code(), std::string(e.what()) + " [solver " + to_string(kind) + ", seed " + std::to_string(seed) +
                                   ", step " + std::to_string(i + 1) + "]");
            }
            sink.push(trace, std::move(r));
        }
        trace.final_weights = weights(solver);
        trace.metrics["state_bytes"] = static_cast<double>(state_bytes(solver));
        trace.metrics["analytic_bytes"] = static_cast<double>(analytic_bytes(solver));
        add_theta_metrics(solver, trace.metrics);
    }
    trace.timings.train_seconds = seconds_since(t0);

    const auto t1 = Clock::now();
    const std::size_t n_test = spec.test_limit ? std::min(spec.test_limit, data.test.size()) : data.test.size();
    if (n_test > 0) {
        Matrix predictions(classes, n_test);
        for (std::size_t i = 0; i < n_test; ++i) {
            hidden_activation_into(layer, data.test.sample(i), a);
            predictions.set_col(i, matvec(trace.final_weights, a));
        }
        trace.metrics["test_error"] = classification_error(
            predictions, std::span<const int>(data.test.labels.data(), n_test));
        trace.metrics["test_samples"] = static_cast<double>(n_test);
    }
    trace.timings.test_seconds = seconds_since(t1);

    trace.metrics["updates"] = static_cast<double>(order.size());
    if (!order.empty()) {
        trace.metrics["train_online_error"] = static_cast<double>(online_wrong) / static_cast<double>(order.size());
        trace.metrics["rms_final"] = rms_error(trace, std::min(spec.metric_window, trace.records.size()));
    }
    trace.timings.total_seconds = seconds_since(t0);
    sink.finish(trace, spec.trace_timings);
    return trace;
}

} // namespace

const char* to_string(TaskKind kind) noexcept
{
    switch (kind) {
    case TaskKind::sine_switch: return "sine-switch";
    case TaskKind::csv_series: return "csv-series";
    case TaskKind::idx_classify: return "idx-classify";
    case TaskKind::random_equivalence: return "random-equivalence";
    }
    return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view name) noexcept
{
    for (auto k : {TaskKind::sine_switch, TaskKind::csv_series, TaskKind::idx_classify, TaskKind::random_equivalence})
        if (name == to_string(k))
            return k;
    return std::nullopt;
}

double RunSpec::effective_epsilon() const
{
    if (epsilon)
        return *epsilon;
    switch (task) {
    case TaskKind::sine_switch: return 10.0;
    case TaskKind::csv_series: return 0.01;
    case TaskKind::idx_classify: return 1e-3;
    case TaskKind::random_equivalence: return 1e-3;
    }
    return defaults::epsilon;
}

Activation RunSpec::effective_activation() const
{
    return activation.value_or(Activation::tanh);
}

WeightDistribution RunSpec::effective_weights(std::size_t) const
{
    if (weights)
        return *weights;
    if (task == TaskKind::idx_classify)
        return WeightDistribution::normal(0.0, 1.0);
    return WeightDistribution::uniform(-0.5, 0.5);
}

void RunSpec::validate() const
{
    if (solvers.empty())
        fail(Errc::invalid_argument, "at least one solver is required");
    if (hidden < 1)
        fail(Errc::invalid_argument, "--hidden must be >= 1");
    if (repeats < 1)
        fail(Errc::invalid_argument, "--repeats must be >= 1");
    if (threads < 1)
        fail(Errc::invalid_argument, "--threads must be >= 1");
    if (!(effective_epsilon() > 0.0) || !std::isfinite(effective_epsilon()))
        fail(Errc::invalid_argument, "--epsilon must be finite and > 0");
    if (!(g > 0.0) || !std::isfinite(g))
        fail(Errc::invalid_argument, "--g must be finite and > 0");
    if (!(c_tol > 0.0))
        fail(Errc::invalid_argument, "--c-tol must be > 0");
    if (std::find(solvers.begin(), solvers.end(), SolverKind::dynamic) != solvers.end() && !(alpha >= 1.0 && alpha < 2.0))
        fail(Errc::invalid_argument, "--alpha must lie in [1, 2) for the dynamic solver (got " + std::to_string(alpha) +
                                         "); the forgetting recursion divides by 2 - alpha");
    if (metric_window < 1)
        fail(Errc::invalid_argument, "metric window must be >= 1");
    if (weights) {
        ElmConfig probe;
        probe.weights = *weights;
        probe.validate();
    }
    switch (task) {
    case TaskKind::sine_switch:
        sine.validate();
        break;
    case TaskKind::csv_series:
        if (series_taps < 1)
            fail(Errc::invalid_argument, "--taps must be >= 1");
        break;
    case TaskKind::idx_classify:
        if (images.empty() || labels.empty())
            fail(Errc::invalid_argument, "idx-classify needs --images and --labels");
        if (test_images.empty() != test_labels.empty())
            fail(Errc::invalid_argument, "--test-images and --test-labels must be given together");
        break;
    case TaskKind::random_equivalence:
        if (samples < 1 || input_dim < 1 || outputs < 1)
            fail(Errc::invalid_argument, "random-equivalence needs --samples, input and output dims >= 1");
        break;
    }
}

json RunSpec::to_json() const
{
    std::vector<std::string> solver_names;
    for (auto s : solvers)
        solver_names.emplace_back(to_string(s));
    json j = {
        {"task", to_string(task)},
        {"solvers", solver_names},
        {"epsilon", effective_epsilon()},
        {"g", g},
        {"alpha", alpha},
        {"c_tol", c_tol},
        {"hidden", hidden},
        {"seed", seed},
        {"repeats", repeats},
        {"activation", to_string(effective_activation())},
        {"weights", weights_to_json(effective_weights(0))},
        {"metric_window", metric_window},
        {"rng", std::string(Rng::kAlgorithm) + "-v" + std::to_string(Rng::kVersion)},
        {"kernels", kernels::active().name},
    };
    switch (task) {
    case TaskKind::sine_switch:
        j["sine"] = {{"dt", sine.dt},           {"f1", sine.f1},
                     {"f2", sine.f2},           {"duration_each", sine.duration_each},
                     {"num_taps", sine.num_taps}, {"tap_stride", sine.tap_stride}};
        break;
    case TaskKind::csv_series:
        j["csv"] = csv;
        j["taps"] = series_taps;
        if (csv.empty())
            j["ecg_samples"] = ecg_samples;
        break;
    case TaskKind::idx_classify:
        j["images"] = images;
        j["labels"] = labels;
        j["test_images"] = test_images;
        j["test_labels"] = test_labels;
        j["train_limit"] = train_limit;
        j["test_limit"] = test_limit;
        break;
    case TaskKind::random_equivalence:
        j["samples"] = samples;
        j["input_dim"] = input_dim;
        j["outputs"] = outputs;
        break;
    }
    return j;
}

std::size_t TaskData::input_dim() const
{
    if (task == TaskKind::idx_classify)
        return train.input_dim();
    return stream.empty() ? 0 : stream.front().input.size();
}

std::size_t TaskData::output_dim() const
{
    if (task == TaskKind::idx_classify)
        return train.num_classes;
    return stream.empty() ? 0 : stream.front().target.size();
}

TaskData prepare_task(const RunSpec& spec)
{
    spec.validate();
    TaskData data;
    data.task = spec.task;
    switch (spec.task) {
    case TaskKind::sine_switch:
        data.stream = make_sine_task(spec.sine);
        data.source = "generated sine-switch";
        break;
    case TaskKind::csv_series:
        if (spec.csv.empty()) {
            // 4 ms sampling; the waveform seed is fixed so every run sees the same signal.
            data.stream = make_series_task(synthetic_ecg(spec.ecg_samples, 0.004, 7), spec.series_taps);
            data.source = "synthetic ECG-like waveform (substitute for a recording)";
        } else {
            data.stream = make_series_task(load_csv_series(spec.csv), spec.series_taps);
            data.source = spec.csv;
        }
        break;
    case TaskKind::idx_classify:
        data.train = load_idx(spec.images, spec.labels);
        if (!spec.test_images.empty()) {
            data.test = load_idx(spec.test_images, spec.test_labels);
            if (data.test.input_dim() != data.train.input_dim())
                fail(Errc::invalid_argument, "test images have " + std::to_string(data.test.input_dim()) +
                                                 " pixels, training images " + std::to_string(data.train.input_dim()));
            data.train.num_classes = data.test.num_classes = std::max(data.train.num_classes, data.test.num_classes);
        }
        data.source = spec.images;
        break;
    case TaskKind::random_equivalence:
        data.stream = make_random_task(spec.input_dim, spec.outputs, spec.samples, spec.seed);
        data.source = "random regression stream";
        break;
    }
    return data;
}

HiddenLayer make_hidden_layer(const RunSpec& spec, std::size_t input_dim, std::uint64_t seed)
{
    ElmConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_dim = spec.hidden;
    cfg.output_dim = 1;
    cfg.activation = spec.effective_activation();
    cfg.weights = spec.effective_weights(input_dim);
    cfg.seed = seed;
    return init_hidden(cfg);
}

AnySolver make_solver(const RunSpec& spec, SolverKind kind, std::size_t m, std::size_t n)
{
    switch (kind) {
    case SolverKind::opium: return OpiumSolver::init(m, n, spec.effective_epsilon());
    case SolverKind::greville: return GrevilleSolver::init(m, n, spec.c_tol);
    case SolverKind::light: return LightSolver::init(m, n, spec.g);
    case SolverKind::dynamic: return DynamicSolver::init(m, n, spec.effective_epsilon(), spec.alpha);
    case SolverKind::batch: break;
    }
    fail(Errc::invalid_argument, "the batch solver has no online state");
}

std::string trace_path(const RunSpec& spec, SolverKind solver, std::uint64_t seed)
{
    if (spec.trace_out.empty())
        return {};
    if (spec.repeats == 1 && spec.solvers.size() == 1)
        return spec.trace_out;
    std::filesystem::path p(spec.trace_out);
    const auto ext = p.extension().string();
    const auto stem = p.stem().string();
    std::string name = stem;
    if (spec.solvers.size() > 1)
        name += std::string(".") + to_string(solver);
    if (spec.repeats > 1)
        name += ".seed" + std::to_string(seed);
    return (p.parent_path() / (name + ext)).string();
}

RunTrace run_experiment(const RunSpec& spec, const TaskData& data, std::uint64_t seed)
{
    spec.validate();
    if (data.task != spec.task)
        fail(Errc::invalid_argument, "task data was prepared for a different task");
    const SolverKind kind = spec.solver();
    json config = spec.to_json();
    config["solver"] = to_string(kind);
    config["run_seed"] = seed;
    config["data_source"] = data.source;
    if (spec.task == TaskKind::idx_classify)
        return run_classification(spec, kind, data, seed, config);
    return run_regression(spec, kind, data, seed, config);
}

RunTrace run_experiment(const RunSpec& spec)
{
    return run_experiment(spec, prepare_task(spec), spec.seed);
}

std::string primary_metric(TaskKind task)
{
    return task == TaskKind::idx_classify ? "test_error" : "rms_final";
}

RepeatedRuns run_repeated(const RunSpec& spec, const TaskData& data)
{
    spec.validate();
    RepeatedRuns out;
    out.solver = spec.solver();
    out.runs.resize(spec.repeats);

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < spec.repeats; i = next++) {
            try {
                out.runs[i] = run_experiment(spec, data, spec.seed + i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next = spec.repeats;
            }
        }
    };
    const std::size_t n_threads = std::min(spec.threads, spec.repeats);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
    }
    if (first_error)
        std::rethrow_exception(first_error);

    std::map<std::string, std::size_t> counts;
    for (const auto& run : out.runs) {
        for (const auto& [key, value] : run.metrics) {
            out.mean_metrics[key] += value;
            ++counts[key];
        }
    }
    for (auto& [key, value] : out.mean_metrics)
        value /= static_cast<double>(counts[key]);
    return out;
}

Comparison run_comparison(const RunSpec& spec, const TaskData& data)
{
    if (spec.solvers.size() < 2)
        fail(Errc::invalid_argument, "compare needs at least two solvers");
    spec.validate();
    Comparison cmp;
    cmp.primary_metric = primary_metric(spec.task);
    for (auto kind : spec.solvers) {
        RunSpec single = spec;
        single.solvers = {kind};
        // Keep per-solver trace names distinct.
        single.trace_out = spec.trace_out.empty() ? "" : trace_path(spec, kind, spec.seed);
        if (!single.trace_out.empty() && spec.repeats > 1) {
            std::filesystem::path p(spec.trace_out);
            single.trace_out = (p.parent_path() / (p.stem().string() + "." + to_string(kind) + p.extension().string())).string();
        }
        cmp.per_solver.push_back(run_repeated(single, data));
    }
    for (std::size_t i = 0; i < cmp.per_solver.size(); ++i) {
        for (std::size_t j = 0; j < cmp.per_solver.size(); ++j) {
            if (i == j)
                continue;
            const auto& wi = cmp.per_solver[i].runs.front().final_weights;
            const auto& wj = cmp.per_solver[j].runs.front().final_weights;
            cmp.weight_differences[std::string(to_string(cmp.per_solver[i].solver)) + "/" +
                                   to_string(cmp.per_solver[j].solver)] = relative_frobenius(wi, wj);
        }
    }
    return cmp;
}

} // namespace opium
