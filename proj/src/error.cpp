#include "opium/error.hpp"

namespace opium {

const char* to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::numeric_degeneracy: return "numeric degeneracy";
    case Errc::parse_error: return "parse error";
    case Errc::io_error: return "i/o error";
    case Errc::internal: return "internal error";
    }
    return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

void fail(Errc code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace opium
