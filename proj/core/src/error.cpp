#include "stressnet/error.hpp"

namespace stressnet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::TooFewKnots: return "TooFewKnots";
    case ErrorKind::NonMonotonicKnots: return "NonMonotonicKnots";
    case ErrorKind::InvalidBand: return "InvalidBand";
    case ErrorKind::SignalTooShort: return "SignalTooShort";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::WindowLongerThanRecord: return "WindowLongerThanRecord";
    case ErrorKind::NoPeaksDetected: return "NoPeaksDetected";
    case ErrorKind::FewerThanTwoKnots: return "FewerThanTwoKnots";
    case ErrorKind::NonPositiveScale: return "NonPositiveScale";
    case ErrorKind::RoiOutOfBounds: return "RoiOutOfBounds";
    case ErrorKind::RectOutOfBounds: return "RectOutOfBounds";
    case ErrorKind::TooFewFrames: return "TooFewFrames";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotADistribution: return "NotADistribution";
    case ErrorKind::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::SingleClassDataset: return "SingleClassDataset";
    case ErrorKind::OutOfRangeProbability: return "OutOfRangeProbability";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NoPositives: return "NoPositives";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::CountOverflowRisk: return "CountOverflowRisk";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::DuplicateTensorName: return "DuplicateTensorName";
    case ErrorKind::ShapeMismatchWithDescriptor: return "ShapeMismatchWithDescriptor";
  }
  return "UnknownError";
}

}  // namespace stressnet
