#pragma once

#include <stdexcept>
#include <string>

namespace opium {

enum class Errc {
    dimension_mismatch,
    non_finite,
    invalid_argument,
    numeric_degeneracy,
    parse_error,
    io_error,
    internal,
};

const char* to_string(Errc code) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

} // namespace opium
