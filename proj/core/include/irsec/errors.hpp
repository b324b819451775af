#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irsec {

// Precondition on a value or shape was violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative kernel failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Cholesky hit a non-positive pivot.
class NotPositiveDefiniteError : public DomainError {
 public:
  NotPositiveDefiniteError(const std::string& what, std::size_t pivot)
      : DomainError(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DegenerateChannelError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Two algebraically identical evaluations of the same quantity disagreed.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace irsec
