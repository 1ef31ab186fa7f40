#pragma once

#include <stdexcept>
#include <string>

namespace swarmseek {

inline constexpr double kPi = 3.14159265358979323846;

/// Invalid or inconsistent configuration: bad model parameters, malformed run
/// configs, initial states the model rejects.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The swarm geometry cannot support the requested computation (zero spread,
/// or offsets that do not span the workspace).
class DegenerateSwarmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A guiding direction was requested inside its singular set (ascent vector
/// norm at or below the configured threshold).
class SingularGuidanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive integration failed: the controller drove the step size below the
/// minimum. Carries the simulated time at which the step collapsed.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace swarmseek
