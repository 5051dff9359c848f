#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "saic/backends.hpp"
#include "saic/cellbank.hpp"
#include "saic/config.hpp"
#include "saic/dataio.hpp"
#include "saic/filtration.hpp"

namespace saic::cli {

backends::BackendSet make_backends(const RunConfig& config);

dataio::Dataset load_dataset(const RunConfig& config);

/// Builds the bank and writes bank.json, crops/, masks/ and manifest.json.
cellbank::CellBank build_bank_stage(const RunConfig& config, backends::BackendSet& backends);

dataio::AugmentationPlan plan_stage(const RunConfig& config);

// Stage names follow the selection / composition / filtration split.
struct StageTimings {
  std::map<std::string, double> total_s{{"selection", 0.0}, {"composition", 0.0}, {"filtration", 0.0}};
  std::size_t entries = 0;

  json to_json() const;
};

struct AugmentSummary {
  std::size_t planned = 0;
  std::size_t kept = 0;
  std::size_t failed = 0;
  filtration::FiltrationStats stats;
  StageTimings timings;

  bool failure_budget_exceeded(double max_fraction) const;
};

/// plan -> select -> compose_pair -> filter_pair per entry; writes the run directory.
AugmentSummary augment_stage(const RunConfig& config, backends::BackendSet& backends);

/// Re-judges the pairs already stored in the run directory.
AugmentSummary filter_stage(const RunConfig& config, backends::BackendSet& backends);

/// Writes report.json, style_points.csv and descriptors.csv into the run directory.
json eval_stage(const RunConfig& config, backends::BackendSet& backends);

/// FID between two image sets through the embedding backend; null with fewer than two images per set.
json fid_section(const std::vector<Raster>& real, const std::vector<Raster>& synthetic,
                 backends::EmbeddingBackend& embedder);

std::string report_text(const std::filesystem::path& run_dir);

}  // namespace saic::cli
