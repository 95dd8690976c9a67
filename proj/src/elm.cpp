#include "opium/elm.hpp"

#include "opium/error.hpp"
#include "opium/kernels.hpp"
#include "opium/prng.hpp"

#include <algorithm>
#include <cmath>

namespace opium {

const char* to_string(Activation act) noexcept
{
    switch (act) {
    case Activation::tanh: return "tanh";
    case Activation::logistic: return "logistic";
    }
    return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) noexcept
{
    if (name == "tanh")
        return Activation::tanh;
    if (name == "logistic")
        return Activation::logistic;
    return std::nullopt;
}

void ElmConfig::validate() const
{
    if (input_dim < 1)
        fail(Errc::invalid_argument, "input_dim must be >= 1");
    if (hidden_dim < 1)
        fail(Errc::invalid_argument, "hidden_dim must be >= 1");
    if (output_dim < 1)
        fail(Errc::invalid_argument, "output_dim must be >= 1");
    if (!std::isfinite(weights.a) || !std::isfinite(weights.b))
        fail(Errc::invalid_argument, "weight distribution parameters must be finite");
    if (weights.kind == WeightDistribution::Kind::uniform && !(weights.a < weights.b))
        fail(Errc::invalid_argument, "uniform weight distribution requires lo < hi");
    if (weights.kind == WeightDistribution::Kind::normal && !(weights.b > 0.0))
        fail(Errc::invalid_argument, "normal weight distribution requires sd > 0");
}

HiddenLayer init_hidden(const ElmConfig& config)
{
    config.validate();
    Rng rng(config.seed);
    HiddenLayer layer;
    layer.activation = config.activation;
    layer.seed = config.seed;
    layer.w1 = Matrix(config.hidden_dim, config.input_dim + 1);
    for (double& w : layer.w1.data()) {
        w = config.weights.kind == WeightDistribution::Kind::uniform ? rng.uniform(config.weights.a, config.weights.b)
                                                                      : rng.normal(config.weights.a, config.weights.b);
    }
    return layer;
}

double activate(Activation act, double z) noexcept
{
    switch (act) {
    case Activation::tanh: return std::tanh(z);
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

void hidden_activation_into(const HiddenLayer& layer, std::span<const double> x, std::span<double> out)
{
    const std::size_t l = layer.input_dim();
    if (x.size() != l)
        fail(Errc::dimension_mismatch,
             "hidden_activation: input has " + std::to_string(x.size()) + " entries, layer expects " + std::to_string(l));
    if (out.size() != layer.hidden_dim())
        fail(Errc::dimension_mismatch, "hidden_activation: output buffer length");
    if (!all_finite(x))
        fail(Errc::non_finite, "hidden_activation: input contains NaN or Inf");

    Vector augmented(l + 1, 1.0);
    std::copy(x.begin(), x.end(), augmented.begin());
    kernels::active().gemv(layer.w1.data().data(), layer.hidden_dim(), l + 1, augmented.data(), out.data());
    for (double& v : out)
        v = activate(layer.activation, v);
}

Vector hidden_activation(const HiddenLayer& layer, std::span<const double> x)
{
    Vector a(layer.hidden_dim());
    hidden_activation_into(layer, x, a);
    return a;
}

Vector forward(const Matrix& w, std::span<const double> a)
{
    return matvec(w, a);
}

} // namespace opium
