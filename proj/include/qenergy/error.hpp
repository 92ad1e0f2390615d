#pragma once

#include <stdexcept>

namespace qenergy {

/// Invalid model input or an illegal state request (bad p-state, empty
/// predicate, unmergeable batch, ...).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Missing or malformed configuration / fixture / workload file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qenergy
