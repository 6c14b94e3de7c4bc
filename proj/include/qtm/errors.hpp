// errors.hpp — Exception types shared across the toolkit

#pragma once

#include <stdexcept>
#include <string>

namespace qtm {

// Convergence failures, positivity blow-ups, truncation overflows.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent user configuration (CLI layer).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qtm
