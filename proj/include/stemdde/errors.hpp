#pragma once

#include <stdexcept>
#include <string>

namespace stemdde {

/// Argument outside its admissible domain (segment time window, rate domain I).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// C1 splice violation when appending a step to a history segment.
class ContinuityError : public std::runtime_error {
public:
    explicit ContinuityError(const std::string& what) : std::runtime_error(what) {}
};

/// The inner threshold y(tau) = x1 is not reached on [0, h].
class ThresholdError : public std::runtime_error {
public:
    explicit ThresholdError(const std::string& what) : std::runtime_error(what) {}
};

/// The maturation path left the closed maturity ball before reaching the
/// threshold; indicates the speed bounds fail along this history.
class ModelViolationError : public std::runtime_error {
public:
    explicit ModelViolationError(const std::string& what) : std::runtime_error(what) {}
};

/// Initial data incompatible with the solution manifold, or the
/// compatibility blend failed to converge.
class CompatibilityError : public std::runtime_error {
public:
    explicit CompatibilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace stemdde
