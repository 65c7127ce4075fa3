#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ditto {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOracle : public Error {
 public:
  using Error::Error;
};

class EstimatorDegenerate : public Error {
 public:
  using Error::Error;
};

class IllConditionedKernel : public Error {
 public:
  using Error::Error;
};

class InsufficientDesign : public Error {
 public:
  using Error::Error;
};

class CorruptSurrogate : public Error {
 public:
  using Error::Error;
};

class InsufficientChain : public Error {
 public:
  using Error::Error;
};

class BadInit : public Error {
 public:
  using Error::Error;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

class NoMass : public Error {
 public:
  using Error::Error;
};

class PartitionRunaway : public Error {
 public:
  using Error::Error;
};

class PointMassError : public Error {
 public:
  using Error::Error;
};

/// The Monte Carlo min/max bracket of a region was too tight: a residual
/// acceptance probability fell below the minorization probability.
class MinorizationViolation : public Error {
 public:
  explicit MinorizationViolation(std::size_t region)
      : Error("minorization violated in region " + std::to_string(region)),
        region_(region) {}

  std::size_t region() const noexcept { return region_; }

 private:
  std::size_t region_;
};

/// The backward times drawn for a run add up to more residual steps than the
/// configured budget. Raised before any residual step is taken.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::int64_t planned, std::int64_t budget)
      : Error("planned " + std::to_string(planned) + " residual steps exceed the budget of " +
              std::to_string(budget)),
        planned_(planned) {}

  std::int64_t planned() const noexcept { return planned_; }

 private:
  std::int64_t planned_;
};

/// A task inside parallel_map threw; carries the failing task index.
class TaskFailed : public Error {
 public:
  TaskFailed(std::size_t index, const std::string& what)
      : Error("task " + std::to_string(index) + " failed: " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ditto
