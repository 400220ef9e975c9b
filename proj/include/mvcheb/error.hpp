#ifndef MVCHEB_ERROR_HPP
#define MVCHEB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvcheb
{

enum class ErrorKind
{
    NotSymmetric,
    NotPositiveDefinite,
    DimensionMismatch,
    NonFinite,
    EmptySampleSet,
    InsufficientSamples,
    NonPositiveParameter,
    NonPositiveEpsilon,
    NonPositiveVariance,
    DeltaOutOfRange,
    UnsupportedDimension,
    InvalidSpec,
    EmptyGrid,
    ParseError,
    IoError,
};

inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::EmptySampleSet: return "EmptySampleSet";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::NonPositiveParameter: return "NonPositiveParameter";
        case ErrorKind::NonPositiveEpsilon: return "NonPositiveEpsilon";
        case ErrorKind::NonPositiveVariance: return "NonPositiveVariance";
        case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
        case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::EmptyGrid: return "EmptyGrid";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers (the CLI in
/// particular) which contract was violated.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message)
        , kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace mvcheb

#endif // MVCHEB_ERROR_HPP
