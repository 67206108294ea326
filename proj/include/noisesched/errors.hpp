#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace noisesched {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the function (e.g. t outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A coefficient or field is singular at the requested time.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double t, double tau)
      : Error(what + " (t=" + std::to_string(t) + ", tau=" + std::to_string(tau) + ")"),
        t_(t),
        tau_(tau) {}

  double t() const noexcept { return t_; }
  double tau() const noexcept { return tau_; }

 private:
  double t_;
  double tau_;
};

/// A trajectory failed; carries the trajectory index and step.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t trajectory, std::size_t step)
      : Error("trajectory " + std::to_string(trajectory) + ", step " + std::to_string(step) +
              ": " + what),
        trajectory_(trajectory),
        step_(step) {}

  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

/// Importance-sampling estimate with too few effective samples.
class UnreliableEstimateError : public Error {
 public:
  using Error::Error;
};

/// Statistical quality gate failed (e.g. too many unroundable spins).
class QualityError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace noisesched
