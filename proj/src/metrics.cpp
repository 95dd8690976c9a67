#include "opium/metrics.hpp"

#include "opium/error.hpp"

#include <cmath>

namespace opium {

double rms(std::span<const double> errors, std::size_t last_n)
{
    if (last_n == 0)
        fail(Errc::invalid_argument, "rms: last_n must be >= 1");
    if (errors.size() < last_n)
        fail(Errc::invalid_argument, "rms: " + std::to_string(errors.size()) + " values, need " + std::to_string(last_n));
    double sum = 0.0;
    for (double e : errors.subspan(errors.size() - last_n))
        sum += e * e;
    return std::sqrt(sum / static_cast<double>(last_n));
}

double rms_error(const RunTrace& trace, std::size_t last_n)
{
    std::vector<double> errors;
    errors.reserve(trace.records.size());
    for (const auto& r : trace.records)
        errors.push_back(r.error);
    return rms(errors, last_n);
}

std::size_t argmax(std::span<const double> v)
{
    if (v.empty())
        fail(Errc::invalid_argument, "argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

double classification_error(const Matrix& predictions, std::span<const int> labels)
{
    if (predictions.cols() != labels.size())
        fail(Errc::dimension_mismatch, "classification_error: " + std::to_string(predictions.cols()) +
                                           " predictions for " + std::to_string(labels.size()) + " labels");
    if (labels.empty())
        return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (static_cast<int>(argmax(predictions.col(i))) != labels[i])
            ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

} // namespace opium
