#include "saic/config.hpp"

#include <set>

namespace saic::cli {

namespace fs = std::filesystem;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::ConfigError, where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error(Errc::ConfigError, where + ": unknown key '" + key + "'");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

backends::HttpOptions endpoint_from_json(const json& j, backends::HttpOptions opts, const std::string& where) {
  check_keys(j, {"url", "timeout_s", "retries", "backoff_ms", "max_connections"}, where);
  opts.endpoint = j.value("url", opts.endpoint);
  opts.timeout_s = j.value("timeout_s", opts.timeout_s);
  opts.retries = j.value("retries", opts.retries);
  opts.backoff_ms = j.value("backoff_ms", opts.backoff_ms);
  opts.max_connections = j.value("max_connections", opts.max_connections);
  if (opts.timeout_s <= 0 || opts.retries < 0 || opts.backoff_ms < 0 || opts.max_connections < 1) {
    throw Error(Errc::ConfigError, where + ": timeout, retries, backoff and connection limits must be positive");
  }
  return opts;
}

json endpoint_to_json(const backends::HttpOptions& o) {
  return {{"url", o.endpoint},
          {"timeout_s", o.timeout_s},
          {"retries", o.retries},
          {"backoff_ms", o.backoff_ms},
          {"max_connections", o.max_connections}};
}

}  // namespace

RunConfig config_from_json(const json& doc, const fs::path& base_dir) {
  RunConfig c;
  try {
    check_keys(doc, {"dataset", "bank", "alpha", "highpass", "backend", "seed", "expand_ratio", "targeting",
                     "tail_threshold", "filtration", "output_dir", "workers", "max_failure_fraction"},
               "config");
    if (!doc.contains("seed")) throw Error(Errc::ConfigError, "config: 'seed' is required");
    c.seed = doc.at("seed").get<std::uint64_t>();

    const auto& ds = doc.at("dataset");
    check_keys(ds, {"path", "format", "category_map"}, "dataset");
    c.dataset_path = resolve(ds.at("path").get<std::string>(), base_dir);
    c.dataset_format = dataio::format_from_string(ds.value("format", "canonical_json"));
    if (ds.contains("category_map") && !ds["category_map"].is_null()) {
      c.category_map = ds["category_map"].get<std::map<std::string, std::string>>();
    }

    if (doc.contains("bank")) {
      const auto& b = doc["bank"];
      check_keys(b, {"dir", "count_min", "count_max", "total"}, "bank");
      if (b.contains("dir")) c.bank_dir = resolve(b["dir"].get<std::string>(), base_dir);
      c.bank.count_min = b.value("count_min", c.bank.count_min);
      c.bank.count_max = b.value("count_max", c.bank.count_max);
      c.bank.total = b.value("total", c.bank.total);
    }
    if (c.bank.count_min < 1 || c.bank.count_max < c.bank.count_min || c.bank.total < 0) {
      throw Error(Errc::ConfigError, "bank: need 1 <= count_min <= count_max and total >= 0");
    }

    c.alpha = doc.value("alpha", c.alpha);
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw Error(Errc::ConfigError, "alpha must lie in [0, 1]");
    c.highpass = imageproc::highpass_kind_from_string(doc.value("highpass", "sobel"));

    if (doc.contains("backend")) {
      const auto& b = doc["backend"];
      check_keys(b, {"mode", "embedding_dim", "defaults", "segment", "embed", "compose", "judge"}, "backend");
      const auto mode = b.value("mode", "reference");
      if (mode == "reference") {
        c.backend.mode = BackendMode::reference;
      } else if (mode == "live") {
        c.backend.mode = BackendMode::live;
      } else {
        throw Error(Errc::ConfigError, "backend.mode must be 'reference' or 'live'");
      }
      c.backend.embedding_dim = b.value("embedding_dim", c.backend.embedding_dim);
      if (c.backend.embedding_dim < 8) throw Error(Errc::ConfigError, "backend.embedding_dim must be at least 8");
      backends::HttpOptions defaults;
      if (b.contains("defaults")) defaults = endpoint_from_json(b["defaults"], defaults, "backend.defaults");
      auto endpoint = [&](const char* name) {
        return b.contains(name) ? endpoint_from_json(b[name], defaults, std::string("backend.") + name) : defaults;
      };
      c.backend.endpoints = {endpoint("segment"), endpoint("embed"), endpoint("compose"), endpoint("judge")};
    }

    c.expand_ratio = doc.value("expand_ratio", c.expand_ratio);
    if (!(c.expand_ratio > 0.0)) throw Error(Errc::ConfigError, "expand_ratio must be positive");
    c.targeting = dataio::targeting_from_string(doc.value("targeting", "tail_weighted"));
    c.tail_threshold = doc.value("tail_threshold", c.tail_threshold);

    if (doc.contains("filtration")) {
      const auto& f = doc["filtration"];
      check_keys(f, {"template", "registry", "on_unparseable"}, "filtration");
      c.template_id = f.value("template", c.template_id);
      if (f.contains("registry") && !f["registry"].is_null()) c.prompt_registry = resolve(f["registry"].get<std::string>(), base_dir);
      c.on_unparseable = filtration::policy_from_string(f.value("on_unparseable", "fallback_background"));
    }

    if (doc.contains("output_dir")) c.output_dir = resolve(doc["output_dir"].get<std::string>(), base_dir);
    c.workers = doc.value("workers", c.workers);
    if (c.workers < 0) throw Error(Errc::ConfigError, "workers must be >= 0");
    c.max_failure_fraction = doc.value("max_failure_fraction", c.max_failure_fraction);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("config: ") + e.what());
  }
  if (c.bank_dir.empty() && !c.output_dir.empty()) c.bank_dir = c.output_dir / "bank";
  return c;
}

RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return config_from_json(doc, path.parent_path());
}

json config_lock_json(const RunConfig& c) {
  // A bank inside the run directory is recorded relative to it, so the lock
  // doubles as a config when loaded from the run directory.
  std::string bank_dir = c.bank_dir.generic_string();
  if (!c.output_dir.empty()) {
    const auto rel = c.bank_dir.lexically_relative(c.output_dir);
    if (!rel.empty() && *rel.begin() != "..") bank_dir = rel.generic_string();
  }
  json category_map = nullptr;
  if (c.category_map) category_map = *c.category_map;
  json backend = {{"mode", c.backend.mode == BackendMode::live ? "live" : "reference"},
                  {"embedding_dim", c.backend.embedding_dim}};
  if (c.backend.mode == BackendMode::live) {
    backend["segment"] = endpoint_to_json(c.backend.endpoints.segment);
    backend["embed"] = endpoint_to_json(c.backend.endpoints.embed);
    backend["compose"] = endpoint_to_json(c.backend.endpoints.compose);
    backend["judge"] = endpoint_to_json(c.backend.endpoints.judge);
  }
  return {{"dataset", {{"path", c.dataset_path.generic_string()},
                       {"format", dataio::to_string(c.dataset_format)},
                       {"category_map", category_map}}},
          {"bank", {{"dir", bank_dir},
                    {"count_min", c.bank.count_min},
                    {"count_max", c.bank.count_max},
                    {"total", c.bank.total}}},
          {"alpha", c.alpha},
          {"highpass", imageproc::to_string(c.highpass)},
          {"backend", backend},
          {"seed", c.seed},
          {"expand_ratio", c.expand_ratio},
          {"targeting", dataio::to_string(c.targeting)},
          {"tail_threshold", c.tail_threshold},
          {"filtration", {{"template", c.template_id},
                          {"registry", c.prompt_registry ? json(c.prompt_registry->generic_string()) : json(nullptr)},
                          {"on_unparseable", filtration::to_string(c.on_unparseable)}}},
          {"max_failure_fraction", c.max_failure_fraction}};
}

std::string config_fingerprint(const RunConfig& config) { return sha256_hex(dump_stable(config_lock_json(config))); }

}  // namespace saic::cli
