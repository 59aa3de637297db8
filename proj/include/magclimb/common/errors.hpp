#pragma once

#include <stdexcept>
#include <string>

namespace magclimb {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, malformed input files, bad CLI arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A physical quantity outside its domain (non-positive standoff, detached plates...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The adhesion model has no oscillatory mode because no plate is attached.
class DetachedError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Simulator configuration that cannot be integrated (e.g. unstable step).
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Tensor or layer shapes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Missing channel, column or key.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for the requested statistic or split.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for this input (zero variance, all-zero spectrum).
class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

/// Training diverged (non-finite loss) or cannot proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace magclimb
