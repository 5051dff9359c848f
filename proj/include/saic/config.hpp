#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "saic/cellbank.hpp"
#include "saic/dataio.hpp"
#include "saic/filtration.hpp"
#include "saic/http_backend.hpp"
#include "saic/imageproc.hpp"
#include "saic/util.hpp"

namespace saic::cli {

enum class BackendMode { reference, live };

struct BackendConfig {
  BackendMode mode = BackendMode::reference;
  backends::LiveEndpoints endpoints;
  int embedding_dim = backends::kDefaultEmbeddingDim;
};

struct RunConfig {
  std::filesystem::path dataset_path;
  dataio::Format dataset_format = dataio::Format::canonical_json;
  std::optional<std::map<std::string, std::string>> category_map;

  std::filesystem::path bank_dir;
  cellbank::BankSamplingConfig bank;  // bank.seed is derived from seed

  double alpha = imageproc::kDefaultAlpha;
  imageproc::HighPassKind highpass = imageproc::HighPassKind::sobel;

  BackendConfig backend;

  std::uint64_t seed = 0;
  double expand_ratio = 1.0;
  dataio::Targeting targeting = dataio::Targeting::tail_weighted;
  int tail_threshold = dataio::kDefaultTailThreshold;

  std::string template_id = filtration::kDefaultTemplate;
  std::optional<std::filesystem::path> prompt_registry;
  filtration::UnparseablePolicy on_unparseable = filtration::UnparseablePolicy::fallback_background;

  std::filesystem::path output_dir;
  int workers = 0;
  double max_failure_fraction = 0.10;

  /// Seeds of the named random substreams.
  std::uint64_t bank_seed() const { return substream_seed(seed, "bank"); }
  std::uint64_t plan_seed() const { return substream_seed(seed, "plan"); }
  std::uint64_t shuffle_seed() const { return substream_seed(seed, "shuffle"); }
  std::uint64_t generate_seed() const { return substream_seed(seed, "generate"); }
};

/// Relative paths resolve against base_dir. Throws ConfigError.
RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Everything that determines run outputs; output_dir and workers are left out.
json config_lock_json(const RunConfig& config);
std::string config_fingerprint(const RunConfig& config);

}  // namespace saic::cli
