#pragma once

#include <stdexcept>
#include <string>

namespace qcavity {

// Bad arguments, malformed configs, schema violations. CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values, failed line searches, stiffness aborts. CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or unwritable files, malformed CSV/JSON artifacts. CLI maps this to exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qcavity
