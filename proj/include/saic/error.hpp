#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace saic {

enum class Errc {
  // data / bank
  EmptyDataset,
  MissingMask,
  NoMatch,
  EmptyBank,
  MissingEmbedding,
  // numerics
  ZeroVector,
  LengthMismatch,
  DimensionMismatch,
  TooFewSamples,
  NumericalFailure,
  EmptyInput,
  // rasters
  EmptyImage,
  EmptyMask,
  EmptySelection,
  RegionOutOfBounds,
  // backends
  BackendUnavailable,
  MalformedResponse,
  GenerationRejected,
  RequestRejected,
  UnparseableVerdict,
  // filtration
  UnknownTemplate,
  // io / schema
  ParseError,
  SchemaError,
  IoError,
  InvalidRatio,
  NoRegions,
  MissingRun,
  ConfigError,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace saic
