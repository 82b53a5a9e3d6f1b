#pragma once

#include <stdexcept>
#include <string>

namespace esom {

// Error taxonomy. CLI exit codes map onto these categories.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed config, invalid parameter combination.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Input file violates the declared schema (missing column, bad header).
struct SchemaError : ConfigError {
    explicit SchemaError(const std::string& msg) : ConfigError(msg) {}
};

// Data fails a domain invariant (capacity factor outside [0,1], ...).
struct ValidationError : ConfigError {
    explicit ValidationError(const std::string& msg) : ConfigError(msg) {}
};

// Filesystem trouble.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// A solve ended in a state the caller cannot use (infeasible, unbounded,
// limit reached without incumbent). Carries the solver status string.
struct SolveError : Error {
    explicit SolveError(const std::string& msg) : Error(msg) {}
};

// Two redundant computations of the same quantity disagreed.
struct InternalConsistencyError : Error {
    explicit InternalConsistencyError(const std::string& msg) : Error(msg) {}
};

}  // namespace esom
