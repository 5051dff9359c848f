#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saic/backends.hpp"
#include "saic/composer.hpp"
#include "saic/util.hpp"

namespace saic::filtration {

inline constexpr const char* kDefaultTemplate = "harmony-v1";
inline constexpr const char* kRegistrySchema = "saic-prompts/1";

struct PromptTemplate {
  std::string text;
  bool paraphrase = false;
};

class PromptRegistry {
 public:
  /// Built-in registry; the same content ships as prompts/registry.json.
  static PromptRegistry builtin();
  static PromptRegistry from_json(const json& doc);
  static PromptRegistry load(const std::filesystem::path& path);

  json to_json() const;
  const std::string& version() const { return version_; }
  const PromptTemplate& get(const std::string& id) const;
  bool contains(const std::string& id) const { return templates_.count(id) != 0; }

 private:
  std::string version_;
  std::map<std::string, PromptTemplate> templates_;
};

/// Renders `{name}` placeholders from vars; unknown placeholders are left
/// as-is. Throws UnknownTemplate.
std::string build_prompt(const PromptRegistry& registry, const std::string& template_id,
                         const std::map<std::string, std::string>& vars = {});

enum class Order { self_first, background_first };
std::string to_string(Order order);
Order order_from_string(const std::string& text);

struct FilteredResult {
  std::string region_id;
  backends::Variant kept_variant = backends::Variant::background_style;
  Order presentation_order = Order::self_first;
  std::string rationale;
  bool fallback = false;  // verdict was unparseable and a policy default applied
};

/// Seeded coin for the presentation order of one pair.
Order presentation_order(std::uint64_t seed, const std::string& region_id);

backends::Variant kept_variant(backends::Choice choice, Order order);

struct FilterOptions {
  std::string prompt;
  std::optional<Order> forced_order;
};

/// One judge call with A/B assigned by the seeded coin (or forced_order).
/// Throws UnparseableVerdict annotated with the region id.
FilteredResult filter_pair(const composer::CompositionPair& pair, backends::JudgeBackend& judge, std::uint64_t seed,
                           const FilterOptions& options);

enum class UnparseablePolicy { fallback_background, drop };
UnparseablePolicy policy_from_string(const std::string& text);
std::string to_string(UnparseablePolicy policy);

struct FiltrationStats {
  std::int64_t total = 0;
  std::int64_t background_kept = 0;
  std::int64_t self_kept = 0;

  double background_ratio() const { return total ? static_cast<double>(background_kept) / total : 0.0; }
  bool operator==(const FiltrationStats&) const = default;
};

FiltrationStats aggregate_stats(const std::vector<FilteredResult>& results);

json to_json(const FilteredResult& result);
FilteredResult result_from_json(const json& doc);
json to_json(const FiltrationStats& stats);

}  // namespace saic::filtration
