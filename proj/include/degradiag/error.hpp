#pragma once

#include <stdexcept>
#include <string>

namespace degradiag {

enum class ErrorKind {
    InvalidTable,
    Domain,
    Numerical,
    Saturation,
    Data,
    DegenerateWindow,
    Window,
    MissingFeature,
    EstimationFailed,
    Schema,
    Validation,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for the library. Carries the originating module name so the
/// command-line front end can report where a failure came from.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return _kind; }
    const std::string& module() const noexcept { return _module; }

    /// True for failures of the numerics (as opposed to bad input).
    bool is_numerical() const noexcept;

private:
    ErrorKind _kind;
    std::string _module;
};

} // namespace degradiag
