#include "opium/tasks.hpp"

#include "opium/error.hpp"
#include "opium/prng.hpp"

#include <cmath>
#include <numbers>

namespace opium {

void SineTaskConfig::validate() const
{
    if (!(dt > 0.0))
        fail(Errc::invalid_argument, "sine task: dt must be > 0");
    if (!(f1 > 0.0) || !(f2 > 0.0))
        fail(Errc::invalid_argument, "sine task: frequencies must be > 0");
    if (!(duration_each > 0.0))
        fail(Errc::invalid_argument, "sine task: duration_each must be > 0");
    if (num_taps < 1)
        fail(Errc::invalid_argument, "sine task: num_taps must be >= 1");
    if (tap_stride < 1)
        fail(Errc::invalid_argument, "sine task: tap_stride must be >= 1");
    if (steps_per_phase() < 1)
        fail(Errc::invalid_argument, "sine task: duration_each is shorter than dt");
}

std::size_t SineTaskConfig::steps_per_phase() const
{
    return static_cast<std::size_t>(std::llround(duration_each / dt));
}

double sine_target(const SineTaskConfig& cfg, std::size_t i)
{
    const double t = static_cast<double>(i) * cfg.dt;
    const double f = i < cfg.steps_per_phase() ? cfg.f1 : cfg.f2;
    return std::sin(2.0 * std::numbers::pi * f * t);
}

std::vector<TaskSample> make_sine_task(const SineTaskConfig& cfg)
{
    cfg.validate();
    const std::size_t n = cfg.total_steps();
    std::vector<double> signal(n);
    for (std::size_t i = 0; i < n; ++i)
        signal[i] = sine_target(cfg, i);

    std::vector<TaskSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = out[i];
        s.input.assign(cfg.num_taps, 0.0);
        for (std::size_t j = 1; j <= cfg.num_taps; ++j) {
            const std::size_t lag = j * cfg.tap_stride;
            if (lag <= i)
                s.input[j - 1] = signal[i - lag];
        }
        s.target = {signal[i]};
    }
    return out;
}

std::vector<TaskSample> make_series_task(std::span<const double> series, std::size_t num_taps)
{
    if (num_taps < 1)
        fail(Errc::invalid_argument, "series task: num_taps must be >= 1");
    if (series.size() <= num_taps)
        fail(Errc::invalid_argument, "series task: series of length " + std::to_string(series.size()) +
                                         " is too short for " + std::to_string(num_taps) + " taps");
    std::vector<TaskSample> out;
    out.reserve(series.size() - num_taps);
    for (std::size_t t = num_taps; t < series.size(); ++t) {
        TaskSample s;
        s.input.resize(num_taps);
        for (std::size_t j = 0; j < num_taps; ++j)
            s.input[j] = series[t - 1 - j];
        s.target = {series[t]};
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TaskSample> make_random_task(std::size_t input_dim, std::size_t output_dim, std::size_t count,
                                         std::uint64_t seed)
{
    if (input_dim < 1 || output_dim < 1)
        fail(Errc::invalid_argument, "random task: dimensions must be >= 1");
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Matrix map(output_dim, input_dim);
    for (double& v : map.data())
        v = rng.normal(0.0, 1.0);

    std::vector<TaskSample> out(count);
    for (auto& s : out) {
        s.input.resize(input_dim);
        for (double& v : s.input)
            v = rng.uniform(-1.0, 1.0);
        s.target = matvec(map, s.input);
        for (double& v : s.target)
            v += rng.normal(0.0, 0.01);
    }
    return out;
}

} // namespace opium
