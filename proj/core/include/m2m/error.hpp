#pragma once

#include <stdexcept>
#include <string>

namespace m2m {

/// Base type for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor or layer dimension mismatch.
struct ShapeError : Error { using Error::Error; };
/// Invalid argument value (label out of range, bad hyperparameter).
struct DomainError : Error { using Error::Error; };
/// Dataset construction or sampling failure (empty class, bad counts).
struct DatasetError : Error { using Error::Error; };
/// Split cannot be satisfied with the available per-class samples.
struct SplitError : Error { using Error::Error; };
/// Imbalance profile cannot be applied to the given dataset.
struct ProfileError : Error { using Error::Error; };
/// Config parse or validation failure.
struct ConfigError : Error { using Error::Error; };
/// Evaluation failure (empty test class, report invariant violation).
struct EvalError : Error { using Error::Error; };
/// I/O failure on checkpoints or data files.
struct IoError : Error { using Error::Error; };

}  // namespace m2m
