#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "saic/cellbank.hpp"
#include "saic/dataio.hpp"
#include "saic/raster.hpp"
#include "saic/util.hpp"

namespace testing {

using saic::Bbox;
using saic::HFMap;
using saic::Raster;
using saic::Rng;

// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

Raster random_raster(Rng& rng, int w, int h, int channels, int lo = 0, int hi = 255);
HFMap random_hfmap(Rng& rng, int w, int h, int channels, double lo = -50.0, double hi = 50.0);
double uniform(Rng& rng, double lo, double hi);

/// Ellipse inscribed in a w x h box, 0/255.
Raster ellipse_mask(int w, int h);
/// Ellipse polygon inscribed in bbox, image coordinates.
std::vector<double> ellipse_ring(const Bbox& bbox, int points = 24);

/// Random bank: crops up to max_side, masks with a random number of leading
/// pixels set, optional unit embeddings of length dim.
saic::cellbank::CellBank random_bank(Rng& rng, int n, const std::vector<std::string>& categories, int dim,
                                     int max_side = 40, int sources = 50);
std::vector<double> random_unit(Rng& rng, int dim);

struct FixtureSpec {
  int images = 10;
  int width = 96;
  int height = 96;
  int cells_per_image = 2;
  std::vector<std::string> categories = {"flora", "lsil", "hsil", "cand"};
  std::uint64_t seed = 7;
  bool with_masks = true;
};

/// Writes images/<id>.png and dataset.json under dir. Each image gets its own
/// stain tint; cells are textured ellipses colored by category, on a grid
/// so they never overlap.
saic::dataio::Dataset write_fixture_dataset(const std::filesystem::path& dir, const FixtureSpec& spec);

/// Config JSON for a reference-backend run over a fixture dataset.
saic::json fixture_config(const std::filesystem::path& dataset, const std::filesystem::path& out,
                          const std::filesystem::path& bank, std::uint64_t seed, double expand_ratio);

/// Every regular file under root, relative path -> bytes.
std::vector<std::pair<std::string, std::string>> snapshot_tree(const std::filesystem::path& root);

}  // namespace testing
