#pragma once

#include <stdexcept>
#include <string>

namespace callroute {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  InvalidConfig(std::string field, const std::string& what)
      : Error("invalid config field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidAction : public Error {
 public:
  using Error::Error;
};

// Broken engine bookkeeping, e.g. scheduling into the past.
class InternalConsistency : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  EpisodeFinished() : Error("step() called after the episode finished") {}
};

class EpisodeNotFinished : public Error {
 public:
  EpisodeNotFinished() : Error("episode has not finished yet") {}
};

class NoReward : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(int iterations, double residual)
      : Error("value iteration did not converge after " +
              std::to_string(iterations) + " sweeps (residual " +
              std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InvalidBuffer : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Malformed policy file; field() names the offending JSON key.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error("policy file field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class Incomparable : public Error {
 public:
  using Error::Error;
};

}  // namespace callroute
