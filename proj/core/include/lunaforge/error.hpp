#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lunaforge {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
    io,                  // unreadable/unwritable file
    malformed_header,    // sidecar header missing keys or unparsable values
    dimension_mismatch,  // payload size disagrees with the header
    invalid_argument,    // precondition violated by the caller
    out_of_bounds,       // grid query outside the valid coordinate range
    hole,                // operation touched a no-data cell
    budget_exceeded,     // pixel or attempt budget exhausted
    validation,          // input data violates a domain invariant
    config,              // configuration file does not match the schema
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace lunaforge
