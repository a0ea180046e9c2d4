#pragma once

#include <stdexcept>
#include <string>

namespace cfm {

/// Failure categories. Each maps to a distinct CLI exit code (see cli.hpp).
enum class Errc {
    parse_error = 1,
    index_out_of_range,
    non_manifold,
    degenerate_triangle,
    disconnected,
    zero_area,
    invalid_argument,
    dimension_mismatch,
    singular_system,
    no_convergence,
    unreachable,
    bad_magic,
    version_mismatch,
    truncated,
    io_error,
    missing_data,
    divergence,
    non_finite,
    triangle_flip,
};

const char* to_string(Errc code);

class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return m_code; }

private:
    Errc m_code;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const std::string& message)
{
    if (!condition) fail(code, message);
}

} // namespace cfm
