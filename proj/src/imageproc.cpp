#include "saic/imageproc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace saic::imageproc {

namespace {

std::uint8_t round_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void require_region(const Raster& background, const Region& region) {
  if (!region.bbox.inside(background.width, background.height)) {
    throw Error(Errc::RegionOutOfBounds, "region bbox (" + std::to_string(region.bbox.x) + "," +
                                             std::to_string(region.bbox.y) + "," + std::to_string(region.bbox.w) +
                                             "," + std::to_string(region.bbox.h) + ") outside " +
                                             std::to_string(background.width) + "x" +
                                             std::to_string(background.height) + " background");
  }
}

void require_bbox_sized(const Raster& r, const Bbox& box, const char* what) {
  if (r.width != box.w || r.height != box.h) {
    throw Error(Errc::DimensionMismatch, std::string(what) + " is " + std::to_string(r.width) + "x" +
                                             std::to_string(r.height) + ", region is " + std::to_string(box.w) +
                                             "x" + std::to_string(box.h));
  }
}

}  // namespace

HighPassKind highpass_kind_from_string(const std::string& text) {
  if (text == "sobel") return HighPassKind::sobel;
  if (text == "laplacian") return HighPassKind::laplacian;
  throw Error(Errc::ConfigError, "unknown high-pass filter '" + text + "'");
}

std::string to_string(HighPassKind kind) { return kind == HighPassKind::sobel ? "sobel" : "laplacian"; }

HFMap highpass(const Raster& image, HighPassKind kind) {
  if (image.empty() || image.data.empty()) throw Error(Errc::EmptyImage, "high-pass of an empty image");
  const int w = image.width;
  const int h = image.height;
  const int ch = image.channels;
  HFMap out(w, h, ch);
  auto px = [&](int x, int y, int c) -> double {
    return image.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), c);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        if (kind == HighPassKind::sobel) {
          const double gx = -px(x - 1, y - 1, c) + px(x + 1, y - 1, c) - 2.0 * px(x - 1, y, c) +
                            2.0 * px(x + 1, y, c) - px(x - 1, y + 1, c) + px(x + 1, y + 1, c);
          const double gy = -px(x - 1, y - 1, c) - 2.0 * px(x, y - 1, c) - px(x + 1, y - 1, c) +
                            px(x - 1, y + 1, c) + 2.0 * px(x, y + 1, c) + px(x + 1, y + 1, c);
          out.at(x, y, c) = std::sqrt(gx * gx + gy * gy);
        } else {
          out.at(x, y, c) =
              px(x - 1, y, c) + px(x + 1, y, c) + px(x, y - 1, c) + px(x, y + 1, c) - 4.0 * px(x, y, c);
        }
      }
    }
  }
  return out;
}

HFMap blend_hf(const HFMap& ht, const HFMap& hr, double alpha) {
  if (!ht.same_shape(hr)) {
    throw Error(Errc::DimensionMismatch, "blend of " + std::to_string(ht.width) + "x" + std::to_string(ht.height) +
                                             "x" + std::to_string(ht.channels) + " with " +
                                             std::to_string(hr.width) + "x" + std::to_string(hr.height) + "x" +
                                             std::to_string(hr.channels));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in [0, 1]");
  HFMap out(ht.width, ht.height, ht.channels);
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double t = ht.data[i];
    const double r = hr.data[i];
    out.data[i] = (t == r) ? t : alpha * t + beta * r;
  }
  return out;
}

Raster normalize_to_u8(const HFMap& map) {
  if (map.empty()) throw Error(Errc::EmptyImage, "normalize of an empty map");
  const auto [lo_it, hi_it] = std::minmax_element(map.data.begin(), map.data.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  Raster out(map.width, map.height, map.channels);
  if (span <= 0.0) return out;
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    out.data[i] = round_u8(255.0 * (map.data[i] - lo) / span);
  }
  return out;
}

Raster stitch(const Raster& background, const HFMap& hf, const Region& region) {
  require_region(background, region);
  const Bbox& box = region.bbox;
  if (hf.width != box.w || hf.height != box.h) {
    throw Error(Errc::DimensionMismatch, "hf map must be resampled to the region size");
  }
  if (hf.channels != 1 && hf.channels != background.channels) {
    throw Error(Errc::DimensionMismatch, "hf channels do not match background");
  }
  require_bbox_sized(region.shape_mask, box, "shape mask");
  if (region.shape_mask.channels != 1) throw Error(Errc::DimensionMismatch, "shape mask must be single-channel");

  const Raster detail = normalize_to_u8(hf);
  Raster out = background;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      if (region.shape_mask.at(x, y) <= 127) continue;
      for (int c = 0; c < background.channels; ++c) {
        out.at(box.x + x, box.y + y, c) = detail.at(x, y, detail.channels == 1 ? 0 : c);
      }
    }
  }
  return out;
}

std::pair<Raster, Raster> center_align(const Raster& crop, const Raster& mask, int canvas_w, int canvas_h) {
  if (crop.width != mask.width || crop.height != mask.height) {
    throw Error(Errc::DimensionMismatch, "crop and mask sizes differ");
  }
  if (mask.channels != 1) throw Error(Errc::DimensionMismatch, "mask must be single-channel");
  if (canvas_w <= 0 || canvas_h <= 0) throw Error(Errc::InvalidArgument, "canvas must be non-empty");
  double sx = 0.0;
  double sy = 0.0;
  std::int64_t n = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) > 127) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(Errc::EmptyMask, "mask has no selected pixels");
  const double cx = sx / static_cast<double>(n);
  const double cy = sy / static_cast<double>(n);
  const int tx = static_cast<int>(std::floor((canvas_w - 1) / 2.0 - cx + 0.5));
  const int ty = static_cast<int>(std::floor((canvas_h - 1) / 2.0 - cy + 0.5));

  Raster out_crop(canvas_w, canvas_h, crop.channels, kNeutralGray);
  Raster out_mask(canvas_w, canvas_h, 1, 0);
  for (int y = 0; y < canvas_h; ++y) {
    const int src_y = y - ty;
    if (src_y < 0 || src_y >= crop.height) continue;
    for (int x = 0; x < canvas_w; ++x) {
      const int src_x = x - tx;
      if (src_x < 0 || src_x >= crop.width) continue;
      for (int c = 0; c < crop.channels; ++c) out_crop.at(x, y, c) = crop.at(src_x, src_y, c);
      out_mask.at(x, y) = mask.at(src_x, src_y);
    }
  }
  return {std::move(out_crop), std::move(out_mask)};
}

Raster isolate(const Raster& crop, const Raster& mask) {
  if (crop.width != mask.width || crop.height != mask.height || mask.channels != 1) {
    throw Error(Errc::DimensionMismatch, "crop and mask sizes differ");
  }
  Raster out = crop;
  for (int y = 0; y < crop.height; ++y) {
    for (int x = 0; x < crop.width; ++x) {
      if (mask.at(x, y) > 127) continue;
      for (int c = 0; c < crop.channels; ++c) out.at(x, y, c) = kNeutralGray;
    }
  }
  return out;
}

std::vector<double> box_blur_alpha(const std::vector<double>& alpha, int width, int height, int radius) {
  if (radius < 0) throw Error(Errc::InvalidArgument, "negative blur radius");
  if (radius == 0) return alpha;
  // Summed-area table with a zero border row/column.
  const int sw = width + 1;
  std::vector<double> sat(static_cast<std::size_t>(sw) * static_cast<std::size_t>(height + 1), 0.0);
  for (int y = 0; y < height; ++y) {
    double row = 0.0;
    for (int x = 0; x < width; ++x) {
      row += alpha[static_cast<std::size_t>(y) * width + x];
      sat[static_cast<std::size_t>(y + 1) * sw + (x + 1)] = sat[static_cast<std::size_t>(y) * sw + (x + 1)] + row;
    }
  }
  const double norm = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  std::vector<double> out(alpha.size());
  for (int y = 0; y < height; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(height, y + radius + 1);
    for (int x = 0; x < width; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(width, x + radius + 1);
      const double s = sat[static_cast<std::size_t>(y1) * sw + x1] - sat[static_cast<std::size_t>(y0) * sw + x1] -
                       sat[static_cast<std::size_t>(y1) * sw + x0] + sat[static_cast<std::size_t>(y0) * sw + x0];
      out[static_cast<std::size_t>(y) * width + x] = s / norm;
    }
  }
  return out;
}

HFMap box_blur(const Raster& image, int radius) {
  if (radius < 0) throw Error(Errc::InvalidArgument, "negative blur radius");
  HFMap out(image.width, image.height, image.channels);
  const double norm = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        double s = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int yy = std::clamp(y + dy, 0, image.height - 1);
          for (int dx = -radius; dx <= radius; ++dx) {
            s += image.at(std::clamp(x + dx, 0, image.width - 1), yy, c);
          }
        }
        out.at(x, y, c) = s / norm;
      }
    }
  }
  return out;
}

Raster feathered_composite(const Raster& background, const Raster& crop, const Raster& mask, const Region& region,
                           int feather_radius) {
  require_region(background, region);
  const Bbox& box = region.bbox;
  require_bbox_sized(crop, box, "crop");
  require_bbox_sized(mask, box, "mask");
  if (mask.channels != 1) throw Error(Errc::DimensionMismatch, "mask must be single-channel");
  if (crop.channels != background.channels && !(crop.channels == 1 && background.channels == 3)) {
    throw Error(Errc::DimensionMismatch, "crop channels do not match background");
  }
  const Raster fg = crop.channels == background.channels ? crop : to_rgb(crop);

  std::vector<double> alpha(static_cast<std::size_t>(box.w) * static_cast<std::size_t>(box.h));
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = mask.data[i] > 127 ? 1.0 : 0.0;
  alpha = box_blur_alpha(alpha, box.w, box.h, feather_radius);

  Raster out = background;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      const double a = alpha[static_cast<std::size_t>(y) * box.w + x];
      if (a <= 0.0) continue;
      for (int c = 0; c < background.channels; ++c) {
        const double b = background.at(box.x + x, box.y + y, c);
        out.at(box.x + x, box.y + y, c) = round_u8(a * fg.at(x, y, c) + (1.0 - a) * b);
      }
    }
  }
  return out;
}

namespace {

struct Taps {
  int i0;
  int i1;
  double f;
};

std::vector<Taps> bilinear_taps(int src, int dst) {
  std::vector<Taps> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (int i = 0; i < dst; ++i) {
    const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
    const int i0 = static_cast<int>(std::floor(s));
    taps[static_cast<std::size_t>(i)] = {i0, std::min(i0 + 1, src - 1), s - i0};
  }
  return taps;
}

template <typename Out, typename In, typename Store>
Out resize_impl(const In& in, int width, int height, Store store) {
  if (in.empty()) throw Error(Errc::EmptyImage, "resize of an empty image");
  if (width <= 0 || height <= 0) throw Error(Errc::InvalidArgument, "resize target must be non-empty");
  if (width == in.width && height == in.height) return in;
  Out out(width, height, in.channels);
  const auto tx = bilinear_taps(in.width, width);
  const auto ty = bilinear_taps(in.height, height);
  for (int y = 0; y < height; ++y) {
    const auto& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const auto& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < in.channels; ++c) {
        const double top = (1.0 - vx.f) * in.at(vx.i0, vy.i0, c) + vx.f * in.at(vx.i1, vy.i0, c);
        const double bot = (1.0 - vx.f) * in.at(vx.i0, vy.i1, c) + vx.f * in.at(vx.i1, vy.i1, c);
        out.at(x, y, c) = store((1.0 - vy.f) * top + vy.f * bot);
      }
    }
  }
  return out;
}

}  // namespace

Raster resize_bilinear(const Raster& image, int width, int height) {
  return resize_impl<Raster>(image, width, height, round_u8);
}

HFMap resize_bilinear(const HFMap& map, int width, int height) {
  return resize_impl<HFMap>(map, width, height, [](double v) { return v; });
}

Raster resize_nearest(const Raster& mask, int width, int height) {
  if (mask.empty()) throw Error(Errc::EmptyImage, "resize of an empty mask");
  if (width <= 0 || height <= 0) throw Error(Errc::InvalidArgument, "resize target must be non-empty");
  if (width == mask.width && height == mask.height) return mask;
  Raster out(width, height, mask.channels);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height - 1, static_cast<int>((y + 0.5) * mask.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width - 1, static_cast<int>((x + 0.5) * mask.width / width));
      for (int c = 0; c < mask.channels; ++c) out.at(x, y, c) = mask.at(sx, sy, c);
    }
  }
  return out;
}

StyleDescriptor color_histogram(const Raster& image, const Raster* mask, int bins_per_channel) {
  if (bins_per_channel < 1 || bins_per_channel > 256) {
    throw Error(Errc::InvalidArgument, "bins_per_channel must lie in [1, 256]");
  }
  if (image.empty()) throw Error(Errc::EmptyImage, "histogram of an empty image");
  const Raster rgb = to_rgb(image);
  if (mask && (mask->width != image.width || mask->height != image.height || mask->channels != 1)) {
    throw Error(Errc::DimensionMismatch, "histogram mask does not match image");
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(3 * bins_per_channel), 0);
  std::int64_t selected = 0;
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      if (mask && mask->at(x, y) <= 127) continue;
      ++selected;
      for (int c = 0; c < 3; ++c) {
        const int bin = rgb.at(x, y, c) * bins_per_channel / 256;
        ++counts[static_cast<std::size_t>(c * bins_per_channel + bin)];
      }
    }
  }
  if (selected == 0) throw Error(Errc::EmptySelection, "no pixels selected for the histogram");
  StyleDescriptor out;
  out.bins_per_channel = bins_per_channel;
  out.values.resize(counts.size());
  const double total = 3.0 * static_cast<double>(selected);
  for (std::size_t i = 0; i < counts.size(); ++i) out.values[i] = static_cast<double>(counts[i]) / total;
  return out;
}

namespace {

constexpr char kHfMagic[8] = {'S', 'A', 'I', 'C', 'H', 'F', '1', '\0'};
constexpr std::size_t kHfHeader = sizeof(kHfMagic) + 3 * sizeof(std::int32_t);

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_hfmap(const HFMap& map) {
  std::vector<std::uint8_t> out(kHfMagic, kHfMagic + sizeof(kHfMagic));
  put_le32(out, static_cast<std::uint32_t>(map.width));
  put_le32(out, static_cast<std::uint32_t>(map.height));
  put_le32(out, static_cast<std::uint32_t>(map.channels));
  out.reserve(kHfHeader + 4 * map.data.size());
  for (double v : map.data) put_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

HFMap decode_hfmap(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHfHeader || std::memcmp(bytes.data(), kHfMagic, sizeof(kHfMagic)) != 0) {
    throw Error(Errc::ParseError, "not an HF map (bad magic)");
  }
  const auto w = static_cast<int>(get_le32(bytes.data() + 8));
  const auto h = static_cast<int>(get_le32(bytes.data() + 12));
  const auto c = static_cast<int>(get_le32(bytes.data() + 16));
  if (w <= 0 || h <= 0 || (c != 1 && c != 3)) throw Error(Errc::ParseError, "HF map header out of range");
  HFMap map(w, h, c);
  if (bytes.size() != kHfHeader + 4 * map.data.size()) throw Error(Errc::ParseError, "HF map payload size mismatch");
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    map.data[i] = std::bit_cast<float>(get_le32(bytes.data() + kHfHeader + 4 * i));
  }
  return map;
}

}  // namespace saic::imageproc
