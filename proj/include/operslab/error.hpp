#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace operslab {

enum class ErrorKind {
    invalid_argument,
    degenerate_frame,
    boundary,
    integration,
    degeneracy,
    domain,
    deformation,
    not_positive,
    convention,
    positivity_domain,
    arrow_source,
    isomonodromy,
    model_mismatch,
    grid_mismatch,
    schema,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::degenerate_frame: return "degenerate frame";
        case ErrorKind::boundary: return "point on triangulation boundary";
        case ErrorKind::integration: return "integration failure";
        case ErrorKind::degeneracy: return "degenerate curve";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::deformation: return "deformation failure";
        case ErrorKind::not_positive: return "connection not positive";
        case ErrorKind::convention: return "convention defect";
        case ErrorKind::positivity_domain: return "positivity domain violated";
        case ErrorKind::arrow_source: return "arrow source mismatch";
        case ErrorKind::isomonodromy: return "monodromy mismatch";
        case ErrorKind::model_mismatch: return "model mismatch";
        case ErrorKind::grid_mismatch: return "grid mismatch";
        case ErrorKind::schema: return "schema error";
    }
    return "unknown error";
}

/// Exception carrying a machine-readable kind; the CLI maps kinds to exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace operslab
