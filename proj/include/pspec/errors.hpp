#pragma once

#include <stdexcept>
#include <string>

namespace pspec {

/// Invalid configuration (rejected before any computation).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data cannot support the requested computation.
struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pspec
