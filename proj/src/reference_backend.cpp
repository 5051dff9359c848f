#include "saic/reference_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "saic/imageproc.hpp"

namespace saic::backends {

Raster ReferenceSegmentation::do_segment(const Raster& /*image*/, const Bbox& bbox) {
  Raster mask(bbox.w, bbox.h, 1, 0);
  const double cx = (bbox.w - 1) / 2.0;
  const double cy = (bbox.h - 1) / 2.0;
  const double rx = bbox.w / 2.0;
  const double ry = bbox.h / 2.0;
  for (int y = 0; y < bbox.h; ++y) {
    for (int x = 0; x < bbox.w; ++x) {
      const double dx = (x - cx) / rx;
      const double dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) mask.at(x, y) = 255;
    }
  }
  return mask;
}

namespace {

Vector quadrant_histogram(const Raster& rgb, const Raster* mask, int x0, int y0, int x1, int y1) {
  Vector h(static_cast<std::size_t>(3 * kReferenceEmbeddingBins), 0.0);
  std::int64_t n = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (mask && mask->at(x, y) <= 127) continue;
      ++n;
      for (int c = 0; c < 3; ++c) h[static_cast<std::size_t>(c * kReferenceEmbeddingBins + rgb.at(x, y, c) * kReferenceEmbeddingBins / 256)] += 1.0;
    }
  }
  if (n > 0) {
    for (double& v : h) v /= 3.0 * static_cast<double>(n);
  }
  return h;
}

}  // namespace

EmbeddingBundle ReferenceEmbedding::do_embed(const Raster& image, const Raster* mask) {
  const auto hist = imageproc::color_histogram(image, mask, kReferenceEmbeddingBins);
  Vector global(static_cast<std::size_t>(dim()), 0.0);
  const std::size_t n = std::min(global.size(), hist.values.size());
  std::copy_n(hist.values.begin(), n, global.begin());
  double norm = 0.0;
  for (double v : global) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    global[0] = 1.0;  // histogram mass fell entirely outside a truncated prefix
  } else {
    for (double& v : global) v /= norm;
  }

  const Raster rgb = to_rgb(image);
  const int mx = rgb.width / 2;
  const int my = rgb.height / 2;
  TokenSequence tokens;
  tokens.push_back(quadrant_histogram(rgb, mask, 0, 0, mx, my));
  tokens.push_back(quadrant_histogram(rgb, mask, mx, 0, rgb.width, my));
  tokens.push_back(quadrant_histogram(rgb, mask, 0, my, mx, rgb.height));
  tokens.push_back(quadrant_histogram(rgb, mask, mx, my, rgb.width, rgb.height));
  return {std::move(global), std::move(tokens)};
}

Raster ReferenceGeneration::do_generate(const GenerationRequest& req) {
  const Bbox& box = req.bbox;
  Raster fg;
  if (req.candidate && !req.candidate->empty()) {
    fg = imageproc::resize_bilinear(*req.candidate, box.w, box.h);
    if (fg.channels != req.background.channels) fg = to_rgb(fg);
  } else {
    fg = crop(req.background, box);
  }
  Region region{box, req.shape_mask, {}, CellType::single_cell, 0};
  Raster out = imageproc::feathered_composite(req.background, fg, req.shape_mask, region, kReferenceFeather);

  const Raster& cond = req.conditioning;
  const int ch = cond.channels;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      if (req.shape_mask.at(x, y) <= 127) continue;
      const int gx = box.x + x;
      const int gy = box.y + y;
      for (int c = 0; c < ch; ++c) {
        double blur = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            blur += cond.at(std::clamp(gx + dx, 0, cond.width - 1), std::clamp(gy + dy, 0, cond.height - 1), c);
          }
        }
        blur /= 9.0;
        const double v = out.at(gx, gy, c) + kReferenceDetailGain * (cond.at(gx, gy, c) - blur);
        out.at(gx, gy, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

double seam_gradient(const Raster& image, const std::vector<bool>& differs) {
  const int w = image.width;
  const int h = image.height;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
  std::vector<double> lum(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (image.channels == 3) {
        lum[idx(x, y)] = (299.0 * image.at(x, y, 0) + 587.0 * image.at(x, y, 1) + 114.0 * image.at(x, y, 2)) / 1000.0;
      } else {
        lum[idx(x, y)] = image.at(x, y);
      }
    }
  }
  auto L = [&](int x, int y) { return lum[idx(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1))]; };
  auto on_seam = [&](int x, int y) {
    const bool d = differs[idx(x, y)];
    static constexpr int kN[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& n : kN) {
      const int nx = x + n[0];
      const int ny = y + n[1];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (differs[idx(nx, ny)] != d) return true;
    }
    return false;
  };
  double sum = 0.0;
  std::int64_t count = 0;
  bool any_seam = false;
  for (int pass = 0; pass < 2 && count == 0; ++pass) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (pass == 0 && !on_seam(x, y)) continue;
        if (pass == 1 && !differs[idx(x, y)]) continue;
        any_seam = true;
        const double gx = -L(x - 1, y - 1) + L(x + 1, y - 1) - 2 * L(x - 1, y) + 2 * L(x + 1, y) - L(x - 1, y + 1) + L(x + 1, y + 1);
        const double gy = -L(x - 1, y - 1) - 2 * L(x, y - 1) - L(x + 1, y - 1) + L(x - 1, y + 1) + 2 * L(x, y + 1) + L(x + 1, y + 1);
        sum += std::sqrt(gx * gx + gy * gy);
        ++count;
      }
    }
  }
  return any_seam ? sum / static_cast<double>(count) : 0.0;
}

std::string ReferenceJudge::do_judge(const Raster& a, const Raster& b, const std::string& /*prompt*/) {
  if (a.data == b.data && a.channels == b.channels) return "Choice: A\nReason: tie";
  const Raster ra = to_rgb(a);
  const Raster rb = to_rgb(b);
  std::vector<bool> differs(static_cast<std::size_t>(a.width) * static_cast<std::size_t>(a.height), false);
  for (std::size_t i = 0; i < differs.size(); ++i) {
    differs[i] = ra.data[3 * i] != rb.data[3 * i] || ra.data[3 * i + 1] != rb.data[3 * i + 1] ||
                 ra.data[3 * i + 2] != rb.data[3 * i + 2];
  }
  const double sa = seam_gradient(ra, differs);
  const double sb = seam_gradient(rb, differs);
  bool pick_a;
  if (sa != sb) {
    pick_a = sa < sb;
  } else {
    // Equal scores: fall back to a content order so the decision never depends on position.
    pick_a = std::lexicographical_compare(ra.data.begin(), ra.data.end(), rb.data.begin(), rb.data.end());
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "Choice: %s\nReason: lower seam gradient (A=%.6f, B=%.6f)", pick_a ? "A" : "B", sa, sb);
  return buf;
}

BackendSet make_reference_backends(int embedding_dim) {
  BackendSet set;
  set.segmentation = std::make_shared<ReferenceSegmentation>();
  set.embedding = std::make_shared<ReferenceEmbedding>(embedding_dim);
  set.generation = std::make_shared<ReferenceGeneration>();
  set.judge = std::make_shared<ReferenceJudge>();
  set.description = "reference";
  return set;
}

}  // namespace saic::backends
