#pragma once

#include "opium/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace opium {

enum class Activation {
    tanh,
    logistic,
};

const char* to_string(Activation act) noexcept;
std::optional<Activation> parse_activation(std::string_view name) noexcept;

struct WeightDistribution {
    enum class Kind { uniform, normal };

    Kind kind = Kind::uniform;
    double a = -0.5; // lo (uniform) or mean (normal)
    double b = 0.5;  // hi (uniform) or sd (normal)

    static WeightDistribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static WeightDistribution normal(double mean, double sd) { return {Kind::normal, mean, sd}; }

    friend bool operator==(const WeightDistribution&, const WeightDistribution&) = default;
};

struct ElmConfig {
    std::size_t input_dim = 10; // L, bias input not included
    std::size_t hidden_dim = 100; // M
    std::size_t output_dim = 1; // N
    Activation activation = Activation::tanh;
    WeightDistribution weights;
    std::uint64_t seed = 1;

    /// Throws Errc::invalid_argument describing the first violated constraint.
    void validate() const;
};

/// Fixed random input-to-hidden projection. Column L of w1 is the bias
/// weight, driven by a constant-1 input appended to every sample.
struct HiddenLayer {
    Matrix w1; // M x (L + 1)
    Activation activation = Activation::tanh;
    std::uint64_t seed = 0;

    std::size_t input_dim() const noexcept { return w1.cols() ? w1.cols() - 1 : 0; }
    std::size_t hidden_dim() const noexcept { return w1.rows(); }

    friend bool operator==(const HiddenLayer&, const HiddenLayer&) = default;
};

/// Draws w1 row by row from config.weights with Rng(config.seed).
HiddenLayer init_hidden(const ElmConfig& config);

/// a_j = f(sum_i w1(j, i) * [x, 1]_i)
Vector hidden_activation(const HiddenLayer& layer, std::span<const double> x);

/// Same as hidden_activation, writing into `out` (length M).
void hidden_activation_into(const HiddenLayer& layer, std::span<const double> x, std::span<double> out);

/// y = W a
Vector forward(const Matrix& w, std::span<const double> a);

double activate(Activation act, double z) noexcept;

} // namespace opium
