#pragma once

#include "opium/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace opium {

/// One step of a supervised stream: raw input x (length L) and target y.
struct TaskSample {
    Vector input;
    Vector target;
};

/// Sine wave whose frequency switches from f1 to f2 after duration_each
/// seconds; the run lasts 2 * duration_each. Inputs are past targets taken
/// every tap_stride samples, zero before the start of the signal.
struct SineTaskConfig {
    double dt = 1e-3;
    double f1 = 10.0;
    double f2 = 20.0;
    double duration_each = 5.0;
    std::size_t num_taps = 10;
    std::size_t tap_stride = 10;

    void validate() const;
    std::size_t steps_per_phase() const;
    std::size_t total_steps() const { return 2 * steps_per_phase(); }
};

/// Target at step index i: sin(2 pi f t) with t = i dt, f = f1 before the
/// switch index and f2 from it on.
double sine_target(const SineTaskConfig& cfg, std::size_t i);

std::vector<TaskSample> make_sine_task(const SineTaskConfig& cfg);

/// One-step-ahead prediction from the num_taps most recent samples:
/// input = [s[t-1], ..., s[t-num_taps]], target = s[t].
std::vector<TaskSample> make_series_task(std::span<const double> series, std::size_t num_taps);

/// Random regression stream: x uniform in [-1, 1]^L, y = B x + 0.01 noise
/// with B drawn once per seed.
std::vector<TaskSample> make_random_task(std::size_t input_dim, std::size_t output_dim, std::size_t count,
                                         std::uint64_t seed);

} // namespace opium
