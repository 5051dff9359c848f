#include "saic/error.hpp"

namespace saic {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::MissingMask: return "MissingMask";
    case Errc::NoMatch: return "NoMatch";
    case Errc::EmptyBank: return "EmptyBank";
    case Errc::MissingEmbedding: return "MissingEmbedding";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyImage: return "EmptyImage";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::RegionOutOfBounds: return "RegionOutOfBounds";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::GenerationRejected: return "GenerationRejected";
    case Errc::RequestRejected: return "RequestRejected";
    case Errc::UnparseableVerdict: return "UnparseableVerdict";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::IoError: return "IoError";
    case Errc::InvalidRatio: return "InvalidRatio";
    case Errc::NoRegions: return "NoRegions";
    case Errc::MissingRun: return "MissingRun";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace saic
