#pragma once

#include <stdexcept>
#include <string>

namespace stressnet {

enum class ErrorKind {
  // signal / numeric validation
  EmptySignal,
  NonFiniteInput,
  TooFewKnots,
  NonMonotonicKnots,
  InvalidBand,
  SignalTooShort,
  NonPositiveSigma,
  WindowLongerThanRecord,
  NoPeaksDetected,
  FewerThanTwoKnots,
  NonPositiveScale,
  RoiOutOfBounds,
  RectOutOfBounds,
  TooFewFrames,
  ShapeMismatch,
  NotADistribution,
  TargetOutOfRange,
  EmptyDataset,
  AlignmentError,
  SingleClassDataset,
  OutOfRangeProbability,
  LengthMismatch,
  ZeroVariance,
  NoPositives,
  InvalidProfile,
  CountOverflowRisk,
  InvalidArgument,
  ConfigError,
  UnknownSubcommand,
  // file I/O
  IoError,
  BadMagic,
  TruncatedFile,
  DimensionOverflow,
  DuplicateTensorName,
  ShapeMismatchWithDescriptor,
};

const char* to_string(ErrorKind kind);

/// Thrown by every fallible operation in the library. `kind()` identifies the
/// contract violation; I/O kinds map to CLI exit code 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  bool is_io() const {
    switch (kind_) {
      case ErrorKind::IoError:
      case ErrorKind::BadMagic:
      case ErrorKind::TruncatedFile:
      case ErrorKind::DimensionOverflow:
      case ErrorKind::DuplicateTensorName:
      case ErrorKind::ShapeMismatchWithDescriptor:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace stressnet
