#include "saic/filtration.hpp"

namespace saic::filtration {

namespace {

const char* const kHarmonyText =
    "Two microscopy images, A and B, show the same background with one inserted cell. "
    "Pick the image where the inserted cell blends in better: staining, color and texture "
    "should match the surrounding cells and there should be no visible seam around it.\n"
    "Answer with exactly one line \"Choice: A\" or \"Choice: B\", then one line \"Reason: <short explanation>\".";

const char* const kHarmonyCategoryText =
    "Two microscopy images, A and B, show the same background with one inserted {category} cell. "
    "Pick the image where the inserted cell blends in better: staining, color and texture "
    "should match the surrounding cells and there should be no visible seam around it.\n"
    "Answer with exactly one line \"Choice: A\" or \"Choice: B\", then one line \"Reason: <short explanation>\".";

}  // namespace

PromptRegistry PromptRegistry::builtin() {
  PromptRegistry r;
  r.version_ = "1";
  r.templates_[kDefaultTemplate] = {kHarmonyText, true};
  r.templates_["harmony-v1-category"] = {kHarmonyCategoryText, true};
  return r;
}

PromptRegistry PromptRegistry::from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kRegistrySchema) {
    throw Error(Errc::SchemaError, std::string("prompt registry: expected schema \"") + kRegistrySchema + "\"");
  }
  PromptRegistry r;
  try {
    r.version_ = doc.at("version").get<std::string>();
    for (const auto& [id, t] : doc.at("templates").items()) {
      r.templates_[id] = {t.at("text").get<std::string>(), t.value("paraphrase", false)};
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("prompt registry: ") + e.what());
  }
  return r;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

json PromptRegistry::to_json() const {
  json templates = json::object();
  for (const auto& [id, t] : templates_) templates[id] = {{"text", t.text}, {"paraphrase", t.paraphrase}};
  return {{"schema", kRegistrySchema}, {"version", version_}, {"templates", templates}};
}

const PromptTemplate& PromptRegistry::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(Errc::UnknownTemplate, "no prompt template '" + id + "'");
  return it->second;
}

std::string build_prompt(const PromptRegistry& registry, const std::string& template_id,
                         const std::map<std::string, std::string>& vars) {
  const std::string& text = registry.get(template_id).text;
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '{') {
      const auto close = text.find('}', i);
      if (close != std::string::npos) {
        auto it = vars.find(text.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

std::string to_string(Order order) { return order == Order::self_first ? "self_first" : "background_first"; }

Order order_from_string(const std::string& text) {
  if (text == "self_first") return Order::self_first;
  if (text == "background_first") return Order::background_first;
  throw Error(Errc::SchemaError, "unknown presentation order '" + text + "'");
}

Order presentation_order(std::uint64_t seed, const std::string& region_id) {
  Rng rng(substream_seed(seed, "order:" + region_id));
  return uniform_below(rng, 2) == 0 ? Order::self_first : Order::background_first;
}

backends::Variant kept_variant(backends::Choice choice, Order order) {
  const bool self_is_a = order == Order::self_first;
  const bool chose_a = choice == backends::Choice::A;
  return self_is_a == chose_a ? backends::Variant::self_style : backends::Variant::background_style;
}

FilteredResult filter_pair(const composer::CompositionPair& pair, backends::JudgeBackend& judge, std::uint64_t seed,
                           const FilterOptions& options) {
  FilteredResult result;
  result.region_id = pair.region_id;
  result.presentation_order = options.forced_order.value_or(presentation_order(seed, pair.region_id));
  const bool self_first = result.presentation_order == Order::self_first;
  const Raster& a = self_first ? pair.self_image : pair.background_image;
  const Raster& b = self_first ? pair.background_image : pair.self_image;
  backends::VlmVerdict verdict;
  try {
    verdict = judge.judge(a, b, options.prompt);
  } catch (const Error& e) {
    if (e.code() != Errc::UnparseableVerdict) throw;
    throw Error(Errc::UnparseableVerdict, "pair " + pair.region_id + ": " + e.what());
  }
  result.kept_variant = kept_variant(verdict.choice, result.presentation_order);
  result.rationale = verdict.rationale;
  return result;
}

UnparseablePolicy policy_from_string(const std::string& text) {
  if (text == "fallback_background") return UnparseablePolicy::fallback_background;
  if (text == "drop") return UnparseablePolicy::drop;
  throw Error(Errc::ConfigError, "unknown unparseable-verdict policy '" + text + "'");
}

std::string to_string(UnparseablePolicy policy) {
  return policy == UnparseablePolicy::drop ? "drop" : "fallback_background";
}

FiltrationStats aggregate_stats(const std::vector<FilteredResult>& results) {
  FiltrationStats s;
  for (const auto& r : results) {
    ++s.total;
    if (r.kept_variant == backends::Variant::background_style) {
      ++s.background_kept;
    } else {
      ++s.self_kept;
    }
  }
  return s;
}

json to_json(const FilteredResult& r) {
  return {{"region_id", r.region_id},
          {"kept_variant", backends::to_string(r.kept_variant)},
          {"presentation_order", to_string(r.presentation_order)},
          {"rationale", r.rationale},
          {"fallback", r.fallback}};
}

FilteredResult result_from_json(const json& doc) {
  try {
    FilteredResult r;
    r.region_id = doc.at("region_id").get<std::string>();
    r.kept_variant = backends::variant_from_string(doc.at("kept_variant").get<std::string>());
    r.presentation_order = order_from_string(doc.at("presentation_order").get<std::string>());
    r.rationale = doc.value("rationale", "");
    r.fallback = doc.value("fallback", false);
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("filtration result: ") + e.what());
  }
}

json to_json(const FiltrationStats& s) {
  return {{"total", s.total},
          {"background_kept", s.background_kept},
          {"self_kept", s.self_kept},
          {"background_ratio", s.background_ratio()}};
}

}  // namespace saic::filtration
