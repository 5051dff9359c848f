#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saic/raster.hpp"
#include "saic/types.hpp"

namespace saic::imageproc {

enum class HighPassKind { sobel, laplacian };

HighPassKind highpass_kind_from_string(const std::string& text);
std::string to_string(HighPassKind kind);

inline constexpr double kDefaultAlpha = 0.1;
inline constexpr std::uint8_t kNeutralGray = 128;

/// Per-channel detail map. Sobel: gradient magnitude sqrt(Gx^2 + Gy^2) with
/// replicate padding. Laplacian: signed 4-neighbour Laplacian, same padding.
HFMap highpass(const Raster& image, HighPassKind kind = HighPassKind::sobel);

/// alpha * Ht + (1 - alpha) * Hr, elementwise. Where Ht and Hr agree the
/// sample is copied through unchanged, so alpha in {0, 1} and Ht == Hr are exact.
HFMap blend_hf(const HFMap& ht, const HFMap& hr, double alpha);

/// Min-max over every sample of the map to [0, 255]. A flat map becomes zeros.
Raster normalize_to_u8(const HFMap& map);

/// Conditioning raster: background outside region.bbox and outside the shape
/// mask; normalized hf inside it. A single-channel hf is broadcast over RGB.
Raster stitch(const Raster& background, const HFMap& hf, const Region& region);

/// Translates crop and mask so the mask centroid lands on the canvas center.
/// Uncovered crop pixels are neutral gray, uncovered mask pixels are 0.
std::pair<Raster, Raster> center_align(const Raster& crop, const Raster& mask, int canvas_w, int canvas_h);

/// Crop with every pixel outside the mask set to neutral gray.
Raster isolate(const Raster& crop, const Raster& mask);

/// Box blur of a [0,1] alpha plane with zero padding; divisor is always (2r+1)^2.
std::vector<double> box_blur_alpha(const std::vector<double>& alpha, int width, int height, int radius);

/// Box blur of an 8-bit raster with replicate padding; result kept real-valued.
HFMap box_blur(const Raster& image, int radius);

/// Alpha-composites crop over background inside region.bbox using the
/// box-blurred binarized mask as alpha. Alpha-0 pixels are untouched.
Raster feathered_composite(const Raster& background, const Raster& crop, const Raster& mask, const Region& region,
                           int feather_radius);

Raster resize_bilinear(const Raster& image, int width, int height);
HFMap resize_bilinear(const HFMap& map, int width, int height);
Raster resize_nearest(const Raster& mask, int width, int height);

struct StyleDescriptor {
  int bins_per_channel = 32;
  std::vector<double> values;
};

inline constexpr int kDefaultHistogramBins = 32;

/// Concatenated per-channel histograms over the selected pixels, normalized to sum 1.
StyleDescriptor color_histogram(const Raster& image, const Raster* mask = nullptr,
                                int bins_per_channel = kDefaultHistogramBins);

/// Bytes of the HF map persistence format: "SAICHF1\0", width, height,
/// channels (little-endian int32), then float32 samples.
std::vector<std::uint8_t> encode_hfmap(const HFMap& map);
HFMap decode_hfmap(const std::vector<std::uint8_t>& bytes);

}  // namespace saic::imageproc
