#pragma once

#include <stdexcept>
#include <string>

namespace sgrd {

/// Argument outside the mathematical domain of a formula (e.g. a <= 0).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A parameter set outside the regime a computation requires.
class RegimeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Mismatched vector lengths or grid sizes.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration: unknown/duplicate/missing keys, bad windows.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input that makes a diagnostic undefined (empty history, duplicate p values).
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state encountered during time stepping.
class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(double t, const std::string& what)
        : std::runtime_error(what), time_(t) {}

    [[nodiscard]] double time() const noexcept { return time_; }

  private:
    double time_;
};

}  // namespace sgrd
