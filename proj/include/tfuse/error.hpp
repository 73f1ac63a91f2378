#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter is outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sizes of vectors/matrices disagree or are too small.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (grids, folds, schedules, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A summary statistic is undefined on the given input (e.g. empty pair set).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed input file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A sampler produced a non-finite value. Carries the update step and,
/// once propagated through a run, the 1-based iteration.
class NumericFailure : public Error {
 public:
  explicit NumericFailure(std::string step, std::size_t iteration = 0)
      : Error(format(step, iteration)), step_(std::move(step)), iteration_(iteration) {}

  const std::string& step() const noexcept { return step_; }
  std::size_t iteration() const noexcept { return iteration_; }

  NumericFailure at_iteration(std::size_t iteration) const {
    return NumericFailure(step_, iteration);
  }

 private:
  static std::string format(const std::string& step, std::size_t iteration) {
    std::string msg = "non-finite value in " + step + " update";
    if (iteration > 0) msg += " at iteration " + std::to_string(iteration);
    return msg;
  }

  std::string step_;
  std::size_t iteration_;
};

/// Too many replications failed in a simulation run.
class AbortedRun : public Error {
 public:
  using Error::Error;
};

}  // namespace tfuse
