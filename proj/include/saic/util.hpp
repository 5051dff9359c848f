#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace saic {

using json = nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Seed for a named random substream ("plan", "shuffle", ...). Stable across
/// platforms: FNV-1a over the name mixed with the root seed by splitmix64.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection; platform-independent unlike
/// std::uniform_int_distribution.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Stable JSON text: sorted keys, two-space indent, trailing newline.
std::string dump_stable(const json& value);

}  // namespace saic

namespace saic {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0: hardware
/// concurrency). Results must be written to per-index slots by fn.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace saic
