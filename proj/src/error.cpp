#include <cfm/error.hpp>

namespace cfm {

const char* to_string(Errc code)
{
    switch (code) {
    case Errc::parse_error: return "parse error";
    case Errc::index_out_of_range: return "index out of range";
    case Errc::non_manifold: return "non-manifold edge";
    case Errc::degenerate_triangle: return "degenerate triangle";
    case Errc::disconnected: return "disconnected mesh";
    case Errc::zero_area: return "zero area";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::singular_system: return "singular system";
    case Errc::no_convergence: return "no convergence";
    case Errc::unreachable: return "unreachable vertex";
    case Errc::bad_magic: return "bad magic";
    case Errc::version_mismatch: return "version mismatch";
    case Errc::truncated: return "truncated file";
    case Errc::io_error: return "i/o error";
    case Errc::missing_data: return "missing data";
    case Errc::divergence: return "divergence";
    case Errc::non_finite: return "non-finite value";
    case Errc::triangle_flip: return "triangle flip";
    }
    return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message)
    , m_code(code)
{}

void fail(Errc code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace cfm
