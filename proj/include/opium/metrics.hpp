#pragma once

#include "opium/matrix.hpp"
#include "opium/trace.hpp"

#include <span>

namespace opium {

/// Root mean square of the final last_n values.
double rms(std::span<const double> errors, std::size_t last_n);

/// RMS of per-step errors over the final last_n records of a trace.
double rms_error(const RunTrace& trace, std::size_t last_n);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Fraction of columns of `predictions` (N x k) whose argmax differs from
/// the label.
double classification_error(const Matrix& predictions, std::span<const int> labels);

} // namespace opium
