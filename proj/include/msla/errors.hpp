#pragma once

/// @file errors.hpp
/// Exception types raised by the attack library.
///
/// Everything derives from msla::Error so callers can catch broadly. Oracle
/// failures share the OracleError base because the CLI maps them to a
/// dedicated exit status.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msla {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidDimensions : public Error {
 public:
  using Error::Error;
};

/// Feasible center region is empty for the requested radius.
class InfeasibleRadius : public Error {
 public:
  using Error::Error;
};

/// No radius in [10, gamma * min(H, W)] exists.
class DegenerateBounds : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteLogit : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class RegionOutOfBounds : public Error {
 public:
  using Error::Error;
};

/// The unperturbed image is not classified as the ground truth.
class CleanMisclassified : public Error {
 public:
  CleanMisclassified(const std::string& what, std::size_t predicted, double p_ground_truth)
      : Error(what), predicted_(predicted), p_gt_(p_ground_truth) {}

  [[nodiscard]] std::size_t predicted() const { return predicted_; }
  [[nodiscard]] double p_ground_truth() const { return p_gt_; }

 private:
  std::size_t predicted_;
  double p_gt_;
};

class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};

class NoFrames : public Error {
 public:
  using Error::Error;
};

class ImageIoError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public OracleError {
 public:
  using OracleError::OracleError;
};

class MalformedResponse : public OracleError {
 public:
  using OracleError::OracleError;
};

class Timeout : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace msla
