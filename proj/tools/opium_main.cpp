// opium: run, compare and verify the online pseudoinverse solvers.
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 runtime or
// numeric failure (including failed verify checks).

#include "opium/error.hpp"
#include "opium/experiment.hpp"
#include "opium/kernels.hpp"
#include "opium/metrics.hpp"
#include "opium/snapshot.hpp"
#include "opium/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

namespace {

using namespace opium;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::string task = "sine-switch";
    std::vector<std::string> solvers;
    std::optional<double> epsilon;
    double g = defaults::g;
    double alpha = defaults::alpha;
    double c_tol = defaults::c_tol;
    std::size_t hidden = 100;
    std::uint64_t seed = 1;
    std::size_t repeats = 1;
    std::size_t threads = 1;
    std::string activation;
    std::string weights;
    double duration_each = SineTaskConfig{}.duration_each;
    std::string csv;
    std::size_t taps = 10;
    std::string images, labels, test_images, test_labels;
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;
    std::size_t samples = 500;
    std::size_t window = 1000;
    std::string trace_out;
    bool trace_timings = false;
};

void add_experiment_options(CLI::App& cmd, Options& o, bool multi_solver)
{
    cmd.add_option("--task", o.task, "sine-switch | csv-series | idx-classify | random-equivalence")
        ->capture_default_str();
    auto* solver = cmd.add_option("--solver", o.solvers,
                                  multi_solver ? "comma-separated solvers (batch, opium, greville, light, dynamic)"
                                               : "batch | opium | greville | light | dynamic");
    if (multi_solver)
        solver->delimiter(',')->required();
    else
        solver->expected(1);
    cmd.add_option("--epsilon", o.epsilon, "eps-initialisation (default: per task; sine 10, csv 0.01, others 1e-3)");
    cmd.add_option("--g", o.g, "OPIUM-light gain")->capture_default_str();
    cmd.add_option("--alpha", o.alpha, "dynamic OPIUM forgetting factor, in [1, 2)")->capture_default_str();
    cmd.add_option("--c-tol", o.c_tol, "Greville branch threshold on |c| / |a|")->capture_default_str();
    cmd.add_option("--hidden", o.hidden, "hidden units M")->capture_default_str();
    cmd.add_option("--seed", o.seed, "first seed")->capture_default_str();
    cmd.add_option("--repeats", o.repeats, "runs with seeds seed .. seed+repeats-1")->capture_default_str();
    cmd.add_option("--threads", o.threads, "worker threads for repeats")->capture_default_str();
    cmd.add_option("--activation", o.activation, "tanh | logistic (default tanh)");
    cmd.add_option("--weights", o.weights, "hidden weights: uniform:LO:HI or normal:MEAN:SD (default: per task)");
    cmd.add_option("--duration-each", o.duration_each, "sine-switch: seconds per frequency")->capture_default_str();
    cmd.add_option("--csv", o.csv, "csv-series: one value per line (default: synthetic ECG-like waveform)");
    cmd.add_option("--taps", o.taps, "csv-series: past samples per input")->capture_default_str();
    cmd.add_option("--images", o.images, "idx-classify: training images (IDX)");
    cmd.add_option("--labels", o.labels, "idx-classify: training labels (IDX)");
    cmd.add_option("--test-images", o.test_images, "idx-classify: test images (IDX)");
    cmd.add_option("--test-labels", o.test_labels, "idx-classify: test labels (IDX)");
    cmd.add_option("--train-limit", o.train_limit, "idx-classify: random training subset size (0: all)");
    cmd.add_option("--test-limit", o.test_limit, "idx-classify: first N test samples (0: all)");
    cmd.add_option("--samples", o.samples, "random-equivalence: stream length")->capture_default_str();
    cmd.add_option("--window", o.window, "final-window length for rms_final")->capture_default_str();
    cmd.add_option("--trace-out", o.trace_out, "trace file (NDJSON); suffixed per solver and seed when several");
    cmd.add_flag("--trace-timings", o.trace_timings, "store wall-clock timings in the trace footer");
}

WeightDistribution parse_weights(const std::string& text)
{
    const auto p1 = text.find(':');
    const auto p2 = p1 == std::string::npos ? std::string::npos : text.find(':', p1 + 1);
    if (p2 == std::string::npos)
        fail(Errc::invalid_argument, "--weights expects uniform:LO:HI or normal:MEAN:SD, got '" + text + "'");
    const std::string kind = text.substr(0, p1);
    double a = 0.0, b = 0.0;
    try {
        a = std::stod(text.substr(p1 + 1, p2 - p1 - 1));
        b = std::stod(text.substr(p2 + 1));
    } catch (const std::exception&) {
        fail(Errc::invalid_argument, "--weights: bad number in '" + text + "'");
    }
    if (kind == "uniform")
        return WeightDistribution::uniform(a, b);
    if (kind == "normal")
        return WeightDistribution::normal(a, b);
    fail(Errc::invalid_argument, "--weights: unknown distribution '" + kind + "'");
}

RunSpec to_spec(const Options& o)
{
    RunSpec s;
    const auto task = parse_task_kind(o.task);
    if (!task)
        fail(Errc::invalid_argument, "unknown --task '" + o.task +
                                         "' (expected sine-switch, csv-series, idx-classify, random-equivalence)");
    s.task = *task;
    s.solvers.clear();
    for (const auto& name : o.solvers) {
        const auto kind = parse_solver_kind(name);
        if (!kind)
            fail(Errc::invalid_argument, "unknown solver '" + name + "' (expected batch, opium, greville, light, dynamic)");
        s.solvers.push_back(*kind);
    }
    if (s.solvers.empty())
        s.solvers.push_back(SolverKind::opium);
    s.epsilon = o.epsilon;
    s.g = o.g;
    s.alpha = o.alpha;
    s.c_tol = o.c_tol;
    s.hidden = o.hidden;
    s.seed = o.seed;
    s.repeats = o.repeats;
    s.threads = o.threads;
    if (!o.activation.empty()) {
        s.activation = parse_activation(o.activation);
        if (!s.activation)
            fail(Errc::invalid_argument, "unknown --activation '" + o.activation + "' (expected tanh or logistic)");
    }
    if (!o.weights.empty())
        s.weights = parse_weights(o.weights);
    s.sine.duration_each = o.duration_each;
    s.csv = o.csv;
    s.series_taps = o.taps;
    s.images = o.images;
    s.labels = o.labels;
    s.test_images = o.test_images;
    s.test_labels = o.test_labels;
    s.train_limit = o.train_limit;
    s.test_limit = o.test_limit;
    s.samples = o.samples;
    s.metric_window = o.window;
    s.trace_out = o.trace_out;
    s.trace_timings = o.trace_timings;
    return s;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

json metrics_json(const std::map<std::string, double>& m)
{
    json j = json::object();
    for (const auto& [k, v] : m)
        j[k] = std::isfinite(v) ? json(v) : json(nullptr);
    return j;
}

void print_metrics(const std::map<std::string, double>& m)
{
    for (const auto& [k, v] : m)
        std::printf("  %-22s %s\n", k.c_str(), fmt(v).c_str());
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunSpec spec = to_spec(o);
    if (spec.solvers.size() != 1)
        fail(Errc::invalid_argument, "run takes exactly one --solver; use compare for several");
    spec.validate();
    const TaskData data = prepare_task(spec);
    const RepeatedRuns runs = run_repeated(spec, data);
    const double wall = elapsed(t0);

    std::printf("task %s, solver %s, M=%zu, seeds %llu..%llu\n", to_string(spec.task), to_string(spec.solver()),
                spec.hidden, static_cast<unsigned long long>(spec.seed),
                static_cast<unsigned long long>(spec.seed + spec.repeats - 1));
    std::printf("data: %s\n", data.source.c_str());
    std::printf("%s over %zu run(s):\n", spec.repeats > 1 ? "mean metrics" : "metrics", spec.repeats);
    print_metrics(runs.mean_metrics);
    if (!spec.trace_out.empty())
        std::printf("trace: %s\n", trace_path(spec, spec.solver(), spec.seed).c_str());
    std::printf("wall clock %.3f s\n", wall);

    json summary = {{"command", "run"},
                    {"task", to_string(spec.task)},
                    {"solver", to_string(spec.solver())},
                    {"repeats", spec.repeats},
                    {"metrics", metrics_json(runs.mean_metrics)},
                    {"wall_seconds", wall}};
    std::cout << summary.dump() << std::endl;
    return kExitOk;
}

int cmd_compare(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunSpec spec = to_spec(o);
    if (spec.solvers.size() < 2)
        fail(Errc::invalid_argument, "compare needs at least two solvers, e.g. --solver opium,light,dynamic");
    spec.validate();
    const TaskData data = prepare_task(spec);
    const Comparison cmp = run_comparison(spec, data);
    const double wall = elapsed(t0);
    const std::string& key = cmp.primary_metric;
    const std::string second = spec.task == TaskKind::idx_classify ? "train_online_error" : "rms_all";

    std::printf("task %s, M=%zu, seeds %llu..%llu, data: %s\n", to_string(spec.task), spec.hidden,
                static_cast<unsigned long long>(spec.seed),
                static_cast<unsigned long long>(spec.seed + spec.repeats - 1), data.source.c_str());
    std::printf("%-10s %14s %18s %12s\n", "solver", key.c_str(), second.c_str(), "train_s");
    json per_solver = json::object();
    for (const auto& r : cmp.per_solver) {
        auto get = [&](const std::string& k) {
            auto it = r.mean_metrics.find(k);
            return it == r.mean_metrics.end() ? NAN : it->second;
        };
        double train = 0.0;
        for (const auto& run : r.runs)
            train += run.timings.train_seconds;
        train /= static_cast<double>(r.runs.size());
        std::printf("%-10s %14s %18s %12.3f\n", to_string(r.solver), fmt(get(key)).c_str(), fmt(get(second)).c_str(),
                    train);
        per_solver[to_string(r.solver)] = metrics_json(r.mean_metrics);
    }

    std::vector<const RepeatedRuns*> order;
    for (const auto& r : cmp.per_solver)
        order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [&](auto* a, auto* b) {
        return a->mean_metrics.at(key) < b->mean_metrics.at(key);
    });
    std::string ordering;
    for (auto* r : order)
        ordering += (ordering.empty() ? "" : " < ") + std::string(to_string(r->solver));
    std::printf("ordering by %s: %s\n", key.c_str(), ordering.c_str());

    json ratios = json::object();
    std::printf("pairwise %s ratios:\n", key.c_str());
    for (std::size_t i = 0; i < cmp.per_solver.size(); ++i)
        for (std::size_t j = i + 1; j < cmp.per_solver.size(); ++j) {
            const auto& a = cmp.per_solver[i];
            const auto& b = cmp.per_solver[j];
            const double ratio = a.mean_metrics.at(key) / b.mean_metrics.at(key);
            const std::string name = std::string(to_string(a.solver)) + "/" + to_string(b.solver);
            std::printf("  %-20s %s\n", name.c_str(), fmt(ratio).c_str());
            ratios[name] = std::isfinite(ratio) ? json(ratio) : json(nullptr);
        }
    std::printf("relative weight differences ||W_i - W_j|| / ||W_j|| (seed %llu):\n",
                static_cast<unsigned long long>(spec.seed));
    for (const auto& [name, v] : cmp.weight_differences)
        std::printf("  %-20s %s\n", name.c_str(), fmt(v).c_str());
    std::printf("wall clock %.3f s\n", wall);

    json summary = {{"command", "compare"},
                    {"task", to_string(spec.task)},
                    {"primary_metric", key},
                    {"ordering", ordering},
                    {"solvers", per_solver},
                    {"ratios", ratios},
                    {"weight_differences", metrics_json(cmp.weight_differences)},
                    {"wall_seconds", wall}};
    std::cout << summary.dump() << std::endl;
    return kExitOk;
}

int cmd_verify(std::uint64_t seed, const std::string& only, const std::string& replay_in, const std::string& replay_out)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckResult> results;
    if (!replay_in.empty()) {
        const Replay r = parse_replay(read_text_file(replay_in));
        std::printf("replaying %s with seed %llu\n", r.check.c_str(), static_cast<unsigned long long>(r.seed));
        seed = r.seed;
        results.push_back(run_check(r.check, r.seed));
    } else if (!only.empty()) {
        results.push_back(run_check(only, seed));
    } else {
        results = run_all_checks(seed);
    }
    const double wall = elapsed(t0);

    std::printf("kernels: %s, seed %llu\n", kernels::active().name, static_cast<unsigned long long>(seed));
    std::printf("%-24s %-5s %11s %9s %8s\n", "check", "", "worst", "tol", "time_s");
    bool all = true;
    json checks = json::array();
    const CheckResult* first_failure = nullptr;
    for (const auto& r : results) {
        std::printf("%-24s %-5s %11s %9s %8.3f\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", fmt(r.worst).c_str(),
                    fmt(r.tolerance).c_str(), r.seconds);
        if (!r.passed) {
            std::printf("    %s\n", r.detail.c_str());
            if (!first_failure)
                first_failure = &r;
        }
        all = all && r.passed;
        checks.push_back({{"name", r.name},
                          {"passed", r.passed},
                          {"worst", std::isfinite(r.worst) ? json(r.worst) : json(nullptr)},
                          {"tolerance", r.tolerance},
                          {"detail", r.detail}});
    }
    if (first_failure && !replay_out.empty()) {
        write_text_file(replay_out, serialize(Replay{first_failure->name, seed}));
        std::printf("failing case written to %s (re-run with --replay %s)\n", replay_out.c_str(), replay_out.c_str());
    }
    std::printf("%s, wall clock %.3f s\n", all ? "all checks passed" : "FAILED", wall);
    json summary = {{"command", "verify"}, {"seed", seed}, {"passed", all}, {"checks", checks}, {"wall_seconds", wall}};
    std::cout << summary.dump() << std::endl;
    return all ? kExitOk : kExitRuntime;
}

int exit_code_for(Errc code)
{
    switch (code) {
    case Errc::invalid_argument:
    case Errc::parse_error:
    case Errc::dimension_mismatch:
        return kExitInvalid;
    default:
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Online pseudoinverse solvers for extreme learning machines"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file; command-line flags take precedence");
    std::string isa;
    app.add_option("--isa", isa, "kernel instruction set: scalar, avx2, neon (default: best available)");

    Options run_opts;
    auto* run = app.add_subcommand("run", "run one solver on a task, optionally over several seeds");
    add_experiment_options(*run, run_opts, false);

    Options cmp_opts;
    auto* compare = app.add_subcommand("compare", "run several solvers on identical streams and seeds");
    add_experiment_options(*compare, cmp_opts, true);

    std::uint64_t verify_seed = 1;
    std::string check, replay_in, replay_out = "opium-verify-failure.replay";
    auto* verify = app.add_subcommand("verify", "run the solver property battery");
    verify->add_option("--seed", verify_seed, "seed for the random instances")->capture_default_str();
    verify->add_option("--check", check, "run a single check");
    verify->add_option("--replay", replay_in, "re-run the failing case stored in a replay file");
    verify->add_option("--replay-out", replay_out, "where to store the first failing case (empty: don't)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (!isa.empty()) {
            const auto which = kernels::parse_isa(isa);
            if (!which)
                fail(Errc::invalid_argument, "unknown --isa '" + isa + "'");
            if (!kernels::set_active(*which))
                fail(Errc::invalid_argument, std::string("--isa ") + isa + " is not available on this machine");
        }
        if (run->parsed())
            return cmd_run(run_opts);
        if (compare->parsed())
            return cmd_compare(cmp_opts);
        if (verify->parsed())
            return cmd_verify(verify_seed, check, replay_in, replay_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "opium: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "opium: error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
