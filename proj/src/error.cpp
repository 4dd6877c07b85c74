#include "degradiag/error.hpp"

namespace degradiag {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidTable: return "invalid-table";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Saturation: return "saturation";
    case ErrorKind::Data: return "data";
    case ErrorKind::DegenerateWindow: return "degenerate-window";
    case ErrorKind::Window: return "window";
    case ErrorKind::MissingFeature: return "missing-feature";
    case ErrorKind::EstimationFailed: return "estimation-failed";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(message), _kind(kind), _module(std::move(module))
{
}

bool Error::is_numerical() const noexcept
{
    return _kind == ErrorKind::Numerical || _kind == ErrorKind::Saturation ||
           _kind == ErrorKind::EstimationFailed || _kind == ErrorKind::MissingFeature;
}

} // namespace degradiag
