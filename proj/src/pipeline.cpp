#include "saic/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "saic/composer.hpp"
#include "saic/evalkit.hpp"
#include "saic/http_backend.hpp"
#include "saic/png_io.hpp"
#include "saic/reference_backend.hpp"

namespace saic::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Raster load_image(const dataio::Dataset& dataset, const std::string& image_id) {
  const auto* entry = dataset.find_image(image_id);
  if (!entry) throw Error(Errc::SchemaError, "unknown image '" + image_id + "'");
  Raster image = to_rgb(png::read(dataset.image_path(*entry)));
  if (image.width != entry->width || image.height != entry->height) {
    throw Error(Errc::SchemaError, "image '" + image_id + "' is " + std::to_string(image.width) + "x" +
                                       std::to_string(image.height) + ", dataset says " + std::to_string(entry->width) +
                                       "x" + std::to_string(entry->height));
  }
  return image;
}

void require_output_dir(const RunConfig& config) {
  if (config.output_dir.empty()) throw Error(Errc::ConfigError, "output_dir is not set");
}

void write_lock(const RunConfig& config) {
  write_text_file(config.output_dir / "config.lock.json", dump_stable(config_lock_json(config)));
}

filtration::PromptRegistry load_registry(const RunConfig& config) {
  return config.prompt_registry ? filtration::PromptRegistry::load(*config.prompt_registry)
                                : filtration::PromptRegistry::builtin();
}

// Column-major run lengths of a bbox-local mask placed in a full image.
dataio::RleMask encode_rle(const Raster& local, const Bbox& bbox, int width, int height) {
  dataio::RleMask rle{height, width, {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      const bool on = bbox.contains(x, y) && local.at(x - bbox.x, y - bbox.y) > 127;
      if (on != current) {
        rle.counts.push_back(run);
        run = 0;
        current = on;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

Raster orig_mask(const dataio::Annotation& ann, const Raster& background, backends::SegmentationBackend& segmenter) {
  Raster mask = dataio::rasterize_mask(ann);
  if (mask.empty() || mask_area(mask) == 0) mask = segmenter.segment(background, ann.bbox);
  return mask;
}

struct Failure {
  std::string stage;
  std::string message;
};

struct Outcome {
  dataio::PlanEntry entry;
  std::optional<composer::CompositionPair> pair;
  std::optional<filtration::FilteredResult> result;
  std::optional<Failure> failure;
  std::string candidate_category;
  CellType candidate_type = CellType::single_cell;
  double selection_s = 0.0;
  double composition_s = 0.0;
  double filtration_s = 0.0;
};

json pair_metadata(const Outcome& o) {
  const auto& p = *o.pair;
  return {{"region_id", p.region_id},
          {"background_image_id", o.entry.background_image_id},
          {"bbox", {p.region.bbox.x, p.region.bbox.y, p.region.bbox.w, p.region.bbox.h}},
          {"query", {{"category", o.entry.category}, {"cell_type", to_string(o.entry.cell_type)}, {"area", o.entry.area}}},
          {"candidate_id", p.candidate_id},
          {"reference_id", p.reference_id},
          {"candidate_category", o.candidate_category},
          {"candidate_cell_type", to_string(o.candidate_type)},
          {"seed", p.seed}};
}

void judge_outcome(Outcome& o, const RunConfig& config, const filtration::PromptRegistry& registry,
                   backends::JudgeBackend& judge) {
  const auto start = Clock::now();
  try {
    filtration::FilterOptions options;
    options.prompt = filtration::build_prompt(registry, config.template_id, {{"category", o.candidate_category}});
    try {
      o.result = filtration::filter_pair(*o.pair, judge, config.shuffle_seed(), options);
    } catch (const Error& e) {
      if (e.code() != Errc::UnparseableVerdict) throw;
      spdlog::warn("{}", e.what());
      if (config.on_unparseable == filtration::UnparseablePolicy::drop) {
        o.failure = Failure{"filtration", e.what()};
      } else {
        filtration::FilteredResult r;
        r.region_id = o.pair->region_id;
        r.presentation_order = filtration::presentation_order(config.shuffle_seed(), o.pair->region_id);
        r.kept_variant = backends::Variant::background_style;
        r.rationale = "unparseable verdict";
        r.fallback = true;
        o.result = r;
      }
    }
  } catch (const std::exception& e) {
    o.failure = Failure{"filtration", e.what()};
  }
  o.filtration_s = seconds_since(start);
}

// Writes everything downstream of the pairs: filtration records, kept
// synthetics, the augmented dataset and failures.
AugmentSummary finalize_run(const RunConfig& config, const dataio::Dataset& dataset, std::vector<Outcome>& outcomes) {
  const fs::path out = config.output_dir;
  fs::remove_all(out / "synthetic");
  fs::create_directories(out / "synthetic");

  dataio::Dataset augmented;
  augmented.root = out;
  augmented.categories = dataset.categories;
  std::error_code ec;
  for (auto img : dataset.images) {
    const fs::path src = dataset.image_path(img);
    const fs::path rel = fs::relative(fs::absolute(src), fs::absolute(out), ec);
    img.path = ec || rel.empty() ? fs::absolute(src).generic_string() : rel.generic_string();
    augmented.images.push_back(img);
  }
  augmented.annotations = dataset.annotations;

  AugmentSummary summary;
  summary.planned = outcomes.size();
  std::string filtration_lines;
  std::string failure_lines;
  std::vector<filtration::FilteredResult> results;
  for (auto& o : outcomes) {
    summary.timings.total_s["selection"] += o.selection_s;
    summary.timings.total_s["composition"] += o.composition_s;
    summary.timings.total_s["filtration"] += o.filtration_s;
    if (o.failure) {
      ++summary.failed;
      failure_lines += json({{"region_id", o.entry.region_id}, {"stage", o.failure->stage}, {"error", o.failure->message}})
                           .dump() +
                       "\n";
      continue;
    }
    const auto& r = *o.result;
    results.push_back(r);
    filtration_lines += filtration::to_json(r).dump() + "\n";
    const auto& p = *o.pair;
    const Raster& kept = r.kept_variant == backends::Variant::self_style ? p.self_image : p.background_image;
    const std::string name = "synthetic/" + p.region_id + ".png";
    png::write(out / name, kept);

    const std::string image_id = "syn-" + p.region_id;
    augmented.images.push_back({image_id, name, kept.width, kept.height});
    for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
      const auto& a = dataset.annotations[i];
      if (a.image_id != o.entry.background_image_id || i == o.entry.annotation_index) continue;
      auto copy = a;
      copy.image_id = image_id;
      augmented.annotations.push_back(std::move(copy));
    }
    dataio::Annotation a;
    a.image_id = image_id;
    a.bbox = p.region.bbox;
    a.category = o.candidate_category;
    a.cell_type = o.candidate_type;
    a.mask = encode_rle(p.region.shape_mask, p.region.bbox, kept.width, kept.height);
    a.area = mask_area(p.region.shape_mask);
    if (a.area == 0) {
      a.area = static_cast<std::int64_t>(a.bbox.w) * a.bbox.h;
      a.mask = std::monostate{};
    }
    augmented.annotations.push_back(std::move(a));
    ++summary.kept;
  }
  summary.stats = filtration::aggregate_stats(results);
  summary.timings.entries = outcomes.size();
  write_text_file(out / "filtration.jsonl", filtration_lines);
  write_text_file(out / "failures.jsonl", failure_lines);
  write_text_file(out / "filtration_stats.json", dump_stable(filtration::to_json(summary.stats)));
  augmented.validate();
  write_text_file(out / "dataset.json", dump_stable(dataio::to_canonical_json(augmented)));
  for (const auto& o : outcomes) {
    if (o.failure) spdlog::warn("region {} failed during {}: {}", o.entry.region_id, o.failure->stage, o.failure->message);
  }
  return summary;
}

void require_run(const RunConfig& config, std::initializer_list<const char*> files) {
  require_output_dir(config);
  for (const char* f : files) {
    if (!fs::exists(config.output_dir / f)) {
      throw Error(Errc::MissingRun, (config.output_dir / f).string() + " not found; run `augment` first");
    }
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

backends::BackendSet make_backends(const RunConfig& config) {
  if (config.backend.mode == BackendMode::reference) return backends::make_reference_backends(config.backend.embedding_dim);
  auto endpoints = config.backend.endpoints;
  if (const char* token = std::getenv("SAIC_BACKEND_TOKEN")) {
    for (auto* e : {&endpoints.segment, &endpoints.embed, &endpoints.compose, &endpoints.judge}) e->bearer_token = token;
  }
  for (const auto* e : {&endpoints.segment, &endpoints.embed, &endpoints.compose, &endpoints.judge}) {
    if (e->endpoint.empty()) throw Error(Errc::ConfigError, "live backend needs a url for every endpoint");
  }
  return backends::make_http_backends(endpoints, config.backend.embedding_dim);
}

dataio::Dataset load_dataset(const RunConfig& config) {
  dataio::ImportOptions options;
  options.category_map = config.category_map;
  return dataio::import_dataset(config.dataset_path, config.dataset_format, options);
}

cellbank::CellBank build_bank_stage(const RunConfig& config, backends::BackendSet& backends) {
  if (config.bank_dir.empty()) throw Error(Errc::ConfigError, "bank.dir is not set");
  const auto dataset = load_dataset(config);
  auto sampling = config.bank;
  sampling.seed = config.bank_seed();
  std::mutex mu;
  std::map<std::string, Raster> cache;
  auto loader = [&](const std::string& id) {
    std::lock_guard lock(mu);
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, load_image(dataset, id)).first;
    return it->second;
  };
  auto bank = cellbank::build_bank(dataset, sampling, loader, backends.segmentation.get(), backends.embedding.get());
  cellbank::save_bank(bank, config.bank_dir);
  std::map<std::string, int> per_category;
  for (const auto& r : bank.records()) ++per_category[r.category];
  const json manifest = {{"schema", "saic-bank-manifest/1"},
                         {"config_fingerprint", config_fingerprint(config)},
                         {"bank_sha256", sha256_hex(read_text_file(config.bank_dir / "bank.json"))},
                         {"records", bank.size()},
                         {"categories", per_category},
                         {"backend", backends.description}};
  write_text_file(config.bank_dir / "manifest.json", dump_stable(manifest));
  return bank;
}

dataio::AugmentationPlan plan_stage(const RunConfig& config) {
  require_output_dir(config);
  const auto dataset = load_dataset(config);
  const auto bank = cellbank::load_bank(config.bank_dir);
  auto plan = dataio::plan_augmentation(dataset, bank, config.expand_ratio, config.targeting, config.tail_threshold,
                                        config.plan_seed());
  write_lock(config);
  write_text_file(config.output_dir / "plan.json", dump_stable(dataio::plan_to_json(plan)));
  return plan;
}

json StageTimings::to_json() const {
  json per_entry = json::object();
  for (const auto& [k, v] : total_s) per_entry[k] = entries ? v / static_cast<double>(entries) : 0.0;
  return {{"entries", entries}, {"total_s", total_s}, {"per_entry_s", per_entry}};
}

bool AugmentSummary::failure_budget_exceeded(double max_fraction) const {
  return planned > 0 && static_cast<double>(failed) > max_fraction * static_cast<double>(planned);
}

AugmentSummary augment_stage(const RunConfig& config, backends::BackendSet& backends) {
  require_output_dir(config);
  const auto dataset = load_dataset(config);
  const auto bank = cellbank::load_bank(config.bank_dir);
  const auto plan = plan_stage(config);
  const auto registry = load_registry(config);
  registry.get(config.template_id);
  composer::ComposeOptions compose_options{config.alpha, config.highpass};

  std::vector<Outcome> outcomes(plan.entries.size());
  parallel_for(plan.entries.size(), config.workers, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    o.entry = plan.entries[i];
    const auto& entry = o.entry;
    const char* stage = "selection";
    try {
      auto start = Clock::now();
      const Raster background = load_image(dataset, entry.background_image_id);
      const auto& ann = dataset.annotations[entry.annotation_index];
      Region region{entry.bbox, orig_mask(ann, background, *backends.segmentation), entry.category, entry.cell_type,
                    entry.area};
      cellbank::SelectionQuery query{entry.category, entry.cell_type, entry.area, entry.background_image_id};
      const cellbank::CellRecord* candidate = nullptr;
      try {
        candidate = &cellbank::select_candidate(bank, query);
      } catch (const Error& e) {
        if (e.code() != Errc::NoMatch) throw;
        // every cell of the bucket came from this background
        query.exclude_source.reset();
        candidate = &cellbank::select_candidate(bank, query);
      }
      const auto orig_embedding =
          cellbank::cell_embedding(*backends.embedding, crop(background, entry.bbox), region.shape_mask);
      const auto& reference = cellbank::select_style_reference(bank, orig_embedding);
      o.candidate_category = candidate->category;
      o.candidate_type = candidate->cell_type;
      o.selection_s = seconds_since(start);

      stage = "composition";
      start = Clock::now();
      const auto seed = substream_seed(config.generate_seed(), entry.region_id);
      o.pair = composer::compose_pair(entry.region_id, background, region, *candidate, reference,
                                      *backends.generation, *backends.embedding, seed, compose_options);
      // the stitched mask, not the annotation, outlines the inserted cell
      o.pair->region.shape_mask = imageproc::resize_nearest(candidate->mask, entry.bbox.w, entry.bbox.h);
      o.composition_s = seconds_since(start);
    } catch (const std::exception& e) {
      o.failure = Failure{stage, e.what()};
      return;
    }
    judge_outcome(o, config, registry, *backends.judge);
  });

  const fs::path out = config.output_dir;
  fs::remove_all(out / "pairs");
  fs::create_directories(out / "pairs");
  for (const auto& o : outcomes) {
    if (!o.pair) continue;
    const auto& p = *o.pair;
    png::write(out / "pairs" / (p.region_id + ".self.png"), p.self_image);
    png::write(out / "pairs" / (p.region_id + ".background.png"), p.background_image);
    write_text_file(out / "pairs" / (p.region_id + ".json"), dump_stable(pair_metadata(o)));
  }
  return finalize_run(config, dataset, outcomes);
}

AugmentSummary filter_stage(const RunConfig& config, backends::BackendSet& backends) {
  require_run(config, {"plan.json"});
  const auto dataset = load_dataset(config);
  const auto plan = dataio::plan_from_json(json::parse(read_text_file(config.output_dir / "plan.json")));
  const auto registry = load_registry(config);
  registry.get(config.template_id);

  std::vector<Outcome> outcomes(plan.entries.size());
  parallel_for(plan.entries.size(), config.workers, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    o.entry = plan.entries[i];
    const fs::path base = config.output_dir / "pairs" / o.entry.region_id;
    if (!fs::exists(fs::path(base.string() + ".json"))) {
      o.failure = Failure{"composition", "no stored pair"};
      return;
    }
    try {
      const json meta = json::parse(read_text_file(base.string() + ".json"));
      composer::CompositionPair pair;
      pair.region_id = o.entry.region_id;
      pair.region.bbox = o.entry.bbox;
      pair.candidate_id = meta.at("candidate_id").get<std::int64_t>();
      pair.reference_id = meta.at("reference_id").get<std::int64_t>();
      pair.seed = meta.at("seed").get<std::uint64_t>();
      pair.self_image = to_rgb(png::read(base.string() + ".self.png"));
      pair.background_image = to_rgb(png::read(base.string() + ".background.png"));
      o.candidate_category = meta.at("candidate_category").get<std::string>();
      o.candidate_type = cell_type_from_string(meta.at("candidate_cell_type").get<std::string>());
      o.pair = std::move(pair);
    } catch (const std::exception& e) {
      o.failure = Failure{"filtration", e.what()};
      return;
    }
    judge_outcome(o, config, registry, *backends.judge);
  });
  // Shape masks come from the bank, keyed by the stored candidate id.
  const auto bank = cellbank::load_bank(config.bank_dir);
  for (auto& o : outcomes) {
    if (!o.pair) continue;
    o.pair->region.shape_mask =
        imageproc::resize_nearest(bank.get(o.pair->candidate_id).mask, o.entry.bbox.w, o.entry.bbox.h);
  }
  return finalize_run(config, dataset, outcomes);
}

json fid_section(const std::vector<Raster>& real, const std::vector<Raster>& synthetic,
                 backends::EmbeddingBackend& embedder) {
  if (real.size() < 2 || synthetic.size() < 2) return nullptr;
  auto embed_all = [&](const std::vector<Raster>& images) {
    std::vector<std::vector<double>> out;
    out.reserve(images.size());
    for (const auto& img : images) out.push_back(embedder.embed(img).global);
    return out;
  };
  const auto a = evalkit::summarize(embed_all(real));
  const auto b = evalkit::summarize(embed_all(synthetic));
  return {{"value", evalkit::frechet_distance(a, b)}, {"real_count", real.size()}, {"synthetic_count", synthetic.size()}};
}

json eval_stage(const RunConfig& config, backends::BackendSet& backends) {
  require_run(config, {"dataset.json", "filtration.jsonl", "plan.json"});
  const fs::path out = config.output_dir;
  const auto original = load_dataset(config);
  const auto augmented = dataio::from_canonical_json(json::parse(read_text_file(out / "dataset.json")), out);
  const auto plan = dataio::plan_from_json(json::parse(read_text_file(out / "plan.json")));
  std::map<std::string, dataio::PlanEntry> entries;
  for (const auto& e : plan.entries) entries[e.region_id] = e;

  std::vector<filtration::FilteredResult> results;
  {
    std::istringstream in(read_text_file(out / "filtration.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) results.push_back(filtration::result_from_json(json::parse(line)));
    }
  }

  std::vector<Raster> real;
  std::vector<std::string> real_ids;
  std::vector<std::string> real_categories;
  for (const auto& img : original.images) {
    real.push_back(load_image(original, img.id));
    real_ids.push_back(img.id);
    std::map<std::string, int> counts;
    for (const auto& a : original.annotations) {
      if (a.image_id == img.id) ++counts[a.category];
    }
    std::string best = "none";
    int best_n = 0;
    for (const auto& [c, n] : counts) {
      if (n > best_n) best = c, best_n = n;
    }
    real_categories.push_back(best);
  }

  std::vector<Raster> synthetic;
  std::vector<std::string> synthetic_ids;
  std::vector<std::string> synthetic_categories;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> fidelity_pairs;
  std::optional<cellbank::CellBank> bank;
  for (const auto& r : results) {
    const json meta = json::parse(read_text_file(out / "pairs" / (r.region_id + ".json")));
    const Raster image = to_rgb(png::read(out / "synthetic" / (r.region_id + ".png")));
    const auto& entry = entries.at(r.region_id);
    synthetic.push_back(image);
    synthetic_ids.push_back("syn-" + r.region_id);
    synthetic_categories.push_back(meta.at("candidate_category").get<std::string>());
    if (!bank) bank = cellbank::load_bank(config.bank_dir);
    const auto& candidate = bank->get(meta.at("candidate_id").get<std::int64_t>());
    const Raster source = imageproc::resize_bilinear(candidate.crop, entry.bbox.w, entry.bbox.h);
    fidelity_pairs.emplace_back(backends.embedding->embed(crop(image, entry.bbox)).global,
                                backends.embedding->embed(source).global);
  }

  json report;
  report["schema"] = "saic-report/1";
  report["config_fingerprint"] = config_fingerprint(config);
  report["backend"] = backends.description;
  json fid = fid_section(real, synthetic, *backends.embedding);
  if (!fid.is_null()) fid["embedding_backend"] = backends.description;
  report["fid"] = fid;
  report["fidelity"] = fidelity_pairs.empty()
                           ? json(nullptr)
                           : json({{"score", evalkit::fidelity_score(fidelity_pairs)}, {"pairs", fidelity_pairs.size()}});

  std::vector<imageproc::StyleDescriptor> descriptors;
  std::vector<std::tuple<std::string, std::string, std::string>> labels;
  for (std::size_t i = 0; i < real.size(); ++i) {
    descriptors.push_back(imageproc::color_histogram(real[i]));
    labels.emplace_back(real_ids[i], "real", real_categories[i]);
  }
  for (std::size_t i = 0; i < synthetic.size(); ++i) {
    descriptors.push_back(imageproc::color_histogram(synthetic[i]));
    labels.emplace_back(synthetic_ids[i], "synthetic", synthetic_categories[i]);
  }
  std::string points_csv = "id,x,y,split,category\n";
  std::string desc_csv = "id,split,category";
  for (int b = 0; b < 3 * imageproc::kDefaultHistogramBins; ++b) desc_csv += ",v" + std::to_string(b);
  desc_csv += "\n";
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    const auto& [id, split, category] = labels[i];
    desc_csv += csv_escape(id) + "," + split + "," + csv_escape(category);
    for (double v : descriptors[i].values) desc_csv += "," + fmt_double(v);
    desc_csv += "\n";
  }
  if (descriptors.size() >= 3) {
    const auto points = evalkit::style_projection(descriptors);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& [id, split, category] = labels[i];
      points_csv += csv_escape(id) + "," + fmt_double(points[i].x) + "," + fmt_double(points[i].y) + "," + split + "," +
                    csv_escape(category) + "\n";
    }
    report["style_projection"] = {{"method", "pca"}, {"points", points.size()}, {"file", "style_points.csv"},
                                  {"descriptors_file", "descriptors.csv"}};
  } else {
    report["style_projection"] = nullptr;
  }
  write_text_file(out / "style_points.csv", points_csv);
  write_text_file(out / "descriptors.csv", desc_csv);

  auto stats_json = [&](const dataio::Dataset& ds) {
    json j = json::object();
    for (const auto& [c, s] : evalkit::tail_stats(ds, config.tail_threshold)) j[c] = {{"count", s.count}, {"is_tail", s.is_tail}};
    return j;
  };
  report["tail_stats"] = {{"threshold", config.tail_threshold},
                          {"original", stats_json(original)},
                          {"augmented", stats_json(augmented)}};
  report["filtration"] = filtration::to_json(filtration::aggregate_stats(results));
  write_text_file(out / "report.json", dump_stable(report));
  return report;
}

std::string report_text(const fs::path& run_dir) {
  if (!fs::exists(run_dir / "report.json")) throw Error(Errc::MissingRun, (run_dir / "report.json").string() + " not found; run `eval` first");
  const json r = json::parse(read_text_file(run_dir / "report.json"));
  std::ostringstream ss;
  ss << "run: " << run_dir.string() << "\n";
  ss << "config fingerprint: " << r.value("config_fingerprint", "") << "\n";
  ss << "backend: " << r.value("backend", "") << "\n";
  if (r["fid"].is_null()) {
    ss << "FID: n/a (fewer than two images per set)\n";
  } else {
    ss << "FID: " << r["fid"]["value"].get<double>() << " (" << r["fid"]["real_count"] << " real, "
       << r["fid"]["synthetic_count"] << " synthetic)\n";
  }
  if (r["fidelity"].is_null()) {
    ss << "fidelity: n/a\n";
  } else {
    ss << "fidelity: " << r["fidelity"]["score"].get<double>() << " over " << r["fidelity"]["pairs"] << " regions\n";
  }
  const auto& f = r["filtration"];
  ss << "filtration: " << f["background_kept"] << " background-style, " << f["self_kept"] << " self-style of "
     << f["total"] << "\n";
  ss << "categories (threshold " << r["tail_stats"]["threshold"] << "):\n";
  const auto& aug = r["tail_stats"]["augmented"];
  for (const auto& [c, s] : r["tail_stats"]["original"].items()) {
    ss << "  " << c << ": " << s["count"] << (s["is_tail"].get<bool>() ? " (tail)" : "");
    if (aug.contains(c)) ss << " -> " << aug[c]["count"];
    ss << "\n";
  }
  return ss.str();
}

}  // namespace saic::cli
