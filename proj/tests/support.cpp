#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <stdlib.h>

#include "saic/png_io.hpp"

namespace testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "saic-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) / 9007199254740992.0);
}

Raster random_raster(Rng& rng, int w, int h, int channels, int lo, int hi) {
  Raster r(w, h, channels);
  for (auto& v : r.data) v = static_cast<std::uint8_t>(lo + static_cast<int>(saic::uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1))));
  return r;
}

HFMap random_hfmap(Rng& rng, int w, int h, int channels, double lo, double hi) {
  HFMap m(w, h, channels);
  for (auto& v : m.data) v = uniform(rng, lo, hi);
  return m;
}

Raster ellipse_mask(int w, int h) {
  Raster m(w, h, 1, 0);
  const double cx = w / 2.0, cy = h / 2.0, rx = w / 2.0, ry = h / 2.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) m.at(x, y) = 255;
    }
  }
  return m;
}

std::vector<double> ellipse_ring(const Bbox& b, int points) {
  std::vector<double> ring;
  const double cx = b.x + b.w / 2.0, cy = b.y + b.h / 2.0;
  for (int i = 0; i < points; ++i) {
    const double t = 2.0 * std::numbers::pi * i / points;
    ring.push_back(cx + 0.5 * b.w * std::cos(t));
    ring.push_back(cy + 0.5 * b.h * std::sin(t));
  }
  return ring;
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double sq = 0.0;
  for (auto& x : v) {
    x = uniform(rng, -1.0, 1.0);
    sq += x * x;
  }
  for (auto& x : v) x /= std::sqrt(sq);
  return v;
}

saic::cellbank::CellBank random_bank(Rng& rng, int n, const std::vector<std::string>& categories, int dim,
                                     int max_side, int sources) {
  std::vector<saic::cellbank::CellRecord> records;
  for (int i = 0; i < n; ++i) {
    saic::cellbank::CellRecord r;
    r.id = 1000 + 3 * i;
    r.category = categories[saic::uniform_below(rng, categories.size())];
    r.cell_type = saic::uniform_below(rng, 4) == 0 ? saic::CellType::clumps : saic::CellType::single_cell;
    const int w = 1 + static_cast<int>(saic::uniform_below(rng, static_cast<std::uint64_t>(max_side)));
    const int h = 1 + static_cast<int>(saic::uniform_below(rng, static_cast<std::uint64_t>(max_side)));
    r.crop = random_raster(rng, w, h, 3);
    r.mask = Raster(w, h, 1, 0);
    const auto on = 1 + saic::uniform_below(rng, static_cast<std::uint64_t>(w * h));
    for (std::uint64_t k = 0; k < on; ++k) r.mask.data[k] = 255;
    r.area = static_cast<std::int64_t>(on);
    r.source_image_id = "img" + std::to_string(saic::uniform_below(rng, static_cast<std::uint64_t>(sources)));
    r.source_bbox = {0, 0, w, h};
    if (dim > 0) r.embedding = random_unit(rng, dim);
    records.push_back(std::move(r));
  }
  return saic::cellbank::CellBank(std::move(records));
}

saic::dataio::Dataset write_fixture_dataset(const fs::path& dir, const FixtureSpec& spec) {
  using namespace saic::dataio;
  Rng rng(spec.seed);
  Dataset ds;
  ds.root = dir;
  ds.categories = spec.categories;
  fs::create_directories(dir / "images");
  const int cols = 2;
  const int cell_w = spec.width / cols;
  const int cell_h = spec.height / std::max(1, (spec.cells_per_image + cols - 1) / cols);
  for (int i = 0; i < spec.images; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "img%03d", i);
    // per-image stain tint
    const int tint_r = 200 + static_cast<int>(saic::uniform_below(rng, 40));
    const int tint_g = 160 + static_cast<int>(saic::uniform_below(rng, 60));
    const int tint_b = 190 + static_cast<int>(saic::uniform_below(rng, 50));
    Raster img(spec.width, spec.height, 3);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const int noise = static_cast<int>(saic::uniform_below(rng, 9)) - 4;
        img.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(tint_r + noise, 0, 255));
        img.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(tint_g + noise, 0, 255));
        img.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(tint_b + noise, 0, 255));
      }
    }
    for (int c = 0; c < spec.cells_per_image; ++c) {
      const std::size_t cat = static_cast<std::size_t>(i * spec.cells_per_image + c) % spec.categories.size();
      const int gx = (c % cols) * cell_w, gy = (c / cols) * cell_h;
      const int w = 14 + static_cast<int>(saic::uniform_below(rng, static_cast<std::uint64_t>(std::max(1, cell_w - 20))));
      const int h = 14 + static_cast<int>(saic::uniform_below(rng, static_cast<std::uint64_t>(std::max(1, cell_h - 20))));
      const Bbox box{gx + 3, gy + 3, std::min(w, cell_w - 6), std::min(h, cell_h - 6)};
      Annotation a;
      a.image_id = id;
      a.bbox = box;
      a.category = spec.categories[cat];
      a.cell_type = c % 3 == 2 ? saic::CellType::clumps : saic::CellType::single_cell;
      if (spec.with_masks) a.mask = PolygonMask{{ellipse_ring(box)}};
      const Raster m = ellipse_mask(box.w, box.h);
      const int base = 60 + static_cast<int>(cat) * 35;
      for (int y = 0; y < box.h; ++y) {
        for (int x = 0; x < box.w; ++x) {
          if (!m.at(x, y)) continue;
          const int tex = ((x / 2 + y / 3) % 3) * 12;
          img.at(box.x + x, box.y + y, 0) = static_cast<std::uint8_t>(std::clamp(base + tex, 0, 255));
          img.at(box.x + x, box.y + y, 1) = static_cast<std::uint8_t>(std::clamp(base / 2 + tex, 0, 255));
          img.at(box.x + x, box.y + y, 2) = static_cast<std::uint8_t>(std::clamp(150 - base / 3 + tex, 0, 255));
        }
      }
      a.area = spec.with_masks ? saic::mask_area(rasterize_mask(a)) : saic::mask_area(m);
      ds.annotations.push_back(std::move(a));
    }
    saic::png::write(dir / "images" / (std::string(id) + ".png"), img);
    ds.images.push_back({id, "images/" + std::string(id) + ".png", spec.width, spec.height});
  }
  saic::write_text_file(dir / "dataset.json", saic::dump_stable(to_canonical_json(ds)));
  return ds;
}

saic::json fixture_config(const fs::path& dataset, const fs::path& out, const fs::path& bank, std::uint64_t seed,
                          double expand_ratio) {
  return {{"dataset", {{"path", dataset.string()}, {"format", "canonical_json"}}},
          {"bank", {{"dir", bank.string()}, {"count_min", 2}, {"count_max", 6}}},
          {"backend", {{"mode", "reference"}, {"embedding_dim", 64}}},
          {"seed", seed},
          {"expand_ratio", expand_ratio},
          {"tail_threshold", 5},
          {"output_dir", out.string()},
          {"workers", 2}};
}

std::vector<std::pair<std::string, std::string>> snapshot_tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.emplace_back(fs::relative(e.path(), root).generic_string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace testing
