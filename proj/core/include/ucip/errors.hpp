#pragma once

#include <stdexcept>
#include <string>

namespace ucip {

// Invalid environment/model/agent configuration (bad field values, inconsistent zones).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Exact-mode request beyond the exact-diagonalization bound (n_hidden > 10).
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf appeared in training updates.
class TrainingDivergenceError : public std::runtime_error {
public:
    explicit TrainingDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A matrix that is supposed to be a density matrix is not one.
class InvalidStateError : public std::runtime_error {
public:
    explicit InvalidStateError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ucip
