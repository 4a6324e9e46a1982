#pragma once

#include <stdexcept>
#include <string>

namespace bdctm {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (non-finite z,
/// probability outside (0,1), non-positive variance, asymmetric matrix).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or too-small dimensions (e.g. D < degree + 1).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Index outside its admissible range (ordinal category, group label).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Problems with observed data: ingest failures, invalid counts, unknown
/// categories or group levels.
class DataError : public Error {
 public:
  using Error::Error;
};

class UnknownLevelError : public DataError {
 public:
  using DataError::DataError;
};

/// Malformed model/sampler/experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Sampler failures, e.g. no finite initial log-posterior.
class SamplerError : public Error {
 public:
  using Error::Error;
};

/// Iterative fit (IRLS / Newton) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Persisted artifacts do not match their manifest.
class StaleArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdctm
