#include "saic/cellbank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "saic/dataio.hpp"
#include "saic/imageproc.hpp"
#include "saic/png_io.hpp"

namespace saic::cellbank {

void validate_record(const CellRecord& r) {
  const std::string who = "record " + std::to_string(r.id);
  if (r.crop.empty() || r.crop.width != r.mask.width || r.crop.height != r.mask.height) {
    throw Error(Errc::SchemaError, who + ": crop and mask sizes differ");
  }
  if (r.mask.channels != 1) throw Error(Errc::SchemaError, who + ": mask must be single-channel");
  if (r.area <= 0 || r.area != mask_area(r.mask)) {
    throw Error(Errc::SchemaError, who + ": area " + std::to_string(r.area) + " does not match mask");
  }
  if (r.embedding) {
    double sq = 0.0;
    for (double v : *r.embedding) sq += v * v;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) throw Error(Errc::SchemaError, who + ": embedding is not unit-norm");
  }
}

CellBank::CellBank(std::vector<CellRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].id == records_[i - 1].id) {
      throw Error(Errc::SchemaError, "duplicate record id " + std::to_string(records_[i].id));
    }
  }
  for (const auto& r : records_) {
    validate_record(r);
    index_[{r.category, r.cell_type}].push_back(r.id);
  }
  for (auto& [key, ids] : index_) {
    std::sort(ids.begin(), ids.end(), [this](std::int64_t a, std::int64_t b) {
      const auto& ra = get(a);
      const auto& rb = get(b);
      return ra.area != rb.area ? ra.area < rb.area : a < b;
    });
  }
}

const CellRecord& CellBank::get(std::int64_t id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const CellRecord& r, std::int64_t v) { return r.id < v; });
  if (it == records_.end() || it->id != id) throw Error(Errc::NoMatch, "no record with id " + std::to_string(id));
  return *it;
}

bool CellBank::has_bucket(const std::string& category, CellType type) const {
  return index_.count({category, type}) != 0;
}

const CellRecord& select_candidate(const CellBank& bank, const SelectionQuery& query) {
  if (query.area <= 0) throw Error(Errc::InvalidArgument, "query area must be positive");
  auto it = bank.index().find({query.category, query.cell_type});
  if (it == bank.index().end()) {
    throw Error(Errc::NoMatch, "no bank cell of category '" + query.category + "' and type " + to_string(query.cell_type));
  }
  const auto& ids = it->second;
  auto usable = [&](std::int64_t id) {
    return !query.exclude_source || bank.get(id).source_image_id != *query.exclude_source;
  };
  const auto first_ge = std::lower_bound(ids.begin(), ids.end(), query.area,
                                         [&](std::int64_t id, std::int64_t area) { return bank.get(id).area < area; });
  const auto pos = static_cast<std::size_t>(first_ge - ids.begin());

  // Right side: first usable at or above the query area; within equal areas ids ascend.
  std::optional<std::int64_t> right;
  for (std::size_t i = pos; i < ids.size(); ++i) {
    if (usable(ids[i])) {
      right = ids[i];
      break;
    }
  }
  // Left side: the nearest smaller area; scanning leftwards within that area
  // visits ids in descending order, so the last usable one seen is the smallest.
  std::optional<std::int64_t> left;
  std::optional<std::int64_t> left_area;
  for (std::size_t i = pos; i-- > 0;) {
    const auto area = bank.get(ids[i]).area;
    if (left_area && area != *left_area) break;
    if (usable(ids[i])) {
      left = ids[i];
      left_area = area;
    }
  }
  if (!left && !right) throw Error(Errc::NoMatch, "every feasible bank cell comes from the excluded source");
  if (!left) return bank.get(*right);
  if (!right) return bank.get(*left);
  const auto dl = query.area - bank.get(*left).area;
  const auto dr = bank.get(*right).area - query.area;
  if (dl != dr) return bank.get(dl < dr ? *left : *right);
  return bank.get(std::min(*left, *right));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::LengthMismatch, "vectors of length " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (nu < 1e-12 || nv < 1e-12) throw Error(Errc::ZeroVector, "cosine similarity of a zero vector");
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

const CellRecord& select_style_reference(const CellBank& bank, std::span<const double> orig_embedding,
                                         const ReferenceConstraint& constraint) {
  if (bank.empty()) throw Error(Errc::EmptyBank, "style reference from an empty bank");
  const CellRecord* best = nullptr;
  double best_sim = -2.0;
  for (const auto& r : bank.records()) {
    if (!r.embedding) throw Error(Errc::MissingEmbedding, "record " + std::to_string(r.id) + " has no embedding");
    if (constraint.same_category && r.category != *constraint.same_category) continue;
    if (constraint.exclude_source && r.source_image_id == *constraint.exclude_source) continue;
    const double sim = cosine_similarity(orig_embedding, *r.embedding);
    if (sim > best_sim) {  // records iterate in ascending id, so ties keep the lower id
      best_sim = sim;
      best = &r;
    }
  }
  if (!best) throw Error(Errc::NoMatch, "no bank cell satisfies the reference constraint");
  return *best;
}

std::map<std::string, int> bank_targets(const std::map<std::string, int>& available, const BankSamplingConfig& s) {
  if (s.count_min < 0 || s.count_max < s.count_min) throw Error(Errc::ConfigError, "invalid bank count range");
  std::map<std::string, int> out;
  if (s.total <= 0) {
    for (const auto& [category, n] : available) out[category] = std::min(n, s.count_max);
    return out;
  }
  // Water-filling: find the scale lambda for which the clamped shares
  // min(n, clamp(lambda * n, lo, hi)) sum to the requested total.
  auto share = [&](int n, double lambda) {
    return std::min(static_cast<double>(n), std::clamp(lambda * n, static_cast<double>(s.count_min),
                                                       static_cast<double>(s.count_max)));
  };
  auto sum_at = [&](double lambda) {
    double sum = 0.0;
    for (const auto& [category, n] : available) sum += share(n, lambda);
    return sum;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (sum_at(hi) < s.total && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sum_at(mid) < s.total ? lo : hi) = mid;
  }
  std::vector<std::pair<double, std::string>> remainders;
  long assigned = 0;
  for (const auto& [category, n] : available) {
    const double exact = share(n, hi);
    const int base = static_cast<int>(std::floor(exact + 1e-9));
    out[category] = base;
    assigned += base;
    if (base < std::min(n, s.count_max)) remainders.emplace_back(exact - base, category);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [frac, category] : remainders) {
    if (assigned >= s.total) break;
    ++out[category];
    ++assigned;
  }
  return out;
}

std::pair<Raster, Raster> cell_canvas(const Raster& crop, const Raster& mask) {
  const int side = std::max(crop.width, crop.height);
  return imageproc::center_align(imageproc::isolate(crop, mask), mask, side, side);
}

std::vector<double> cell_embedding(backends::EmbeddingBackend& embedder, const Raster& crop, const Raster& mask) {
  const auto [aligned, aligned_mask] = cell_canvas(crop, mask);
  return embedder.embed(aligned, &aligned_mask).global;
}

CellBank build_bank(const dataio::Dataset& dataset, const BankSamplingConfig& sampling, const ImageLoader& load_image,
                    backends::SegmentationBackend* segmenter, backends::EmbeddingBackend* embedder) {
  if (dataset.annotations.empty()) throw Error(Errc::EmptyDataset, "dataset has no annotated regions");
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    by_category[dataset.annotations[i].category].push_back(i);
  }
  std::map<std::string, int> available;
  for (const auto& [c, idx] : by_category) available[c] = static_cast<int>(idx.size());
  const auto targets = bank_targets(available, sampling);

  std::unordered_map<std::string, Raster> image_cache;
  auto image_for = [&](const std::string& id) -> const Raster& {
    auto it = image_cache.find(id);
    if (it == image_cache.end()) it = image_cache.emplace(id, to_rgb(load_image(id))).first;
    return it->second;
  };

  std::vector<CellRecord> records;
  std::int64_t next_id = 0;
  for (auto& [category, indices] : by_category) {
    Rng rng(substream_seed(sampling.seed, "bank:" + category));
    deterministic_shuffle(indices, rng);
    indices.resize(static_cast<std::size_t>(targets.at(category)));
    std::sort(indices.begin(), indices.end());
    for (std::size_t ai : indices) {
      const auto& ann = dataset.annotations[ai];
      const Raster& image = image_for(ann.image_id);
      CellRecord rec;
      rec.id = next_id++;
      rec.category = ann.category;
      rec.cell_type = ann.cell_type;
      rec.source_image_id = ann.image_id;
      rec.source_bbox = ann.bbox;
      rec.crop = crop(image, ann.bbox);
      rec.mask = dataio::rasterize_mask(ann);
      if (rec.mask.empty() || mask_area(rec.mask) == 0) {
        if (!segmenter) {
          throw Error(Errc::MissingMask, "annotation " + std::to_string(ai) + " on image '" + ann.image_id +
                                             "' has no usable mask and no segmentation backend is configured");
        }
        rec.mask = segmenter->segment(image, ann.bbox);
      }
      rec.area = mask_area(rec.mask);
      if (embedder) rec.embedding = cell_embedding(*embedder, rec.crop, rec.mask);
      records.push_back(std::move(rec));
    }
  }
  return CellBank(std::move(records));
}

json bank_to_json(const CellBank& bank) {
  json records = json::array();
  for (const auto& r : bank.records()) {
    const auto id = std::to_string(r.id);
    records.push_back({{"id", r.id},
                       {"category", r.category},
                       {"cell_type", to_string(r.cell_type)},
                       {"area", r.area},
                       {"width", r.crop.width},
                       {"height", r.crop.height},
                       {"source_image_id", r.source_image_id},
                       {"source_bbox", {r.source_bbox.x, r.source_bbox.y, r.source_bbox.w, r.source_bbox.h}},
                       {"crop", "crops/" + id + ".png"},
                       {"mask", "masks/" + id + ".png"},
                       {"embedding", r.embedding ? json(*r.embedding) : json(nullptr)}});
  }
  return {{"schema", kBankSchema}, {"records", std::move(records)}};
}

void save_bank(const CellBank& bank, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(dir / "bank.json")) {
    fs::remove_all(dir / "crops");
    fs::remove_all(dir / "masks");
  }
  fs::create_directories(dir / "crops");
  fs::create_directories(dir / "masks");
  for (const auto& r : bank.records()) {
    png::write(dir / "crops" / (std::to_string(r.id) + ".png"), r.crop);
    png::write(dir / "masks" / (std::to_string(r.id) + ".png"), r.mask);
  }
  write_text_file(dir / "bank.json", dump_stable(bank_to_json(bank)));
}

CellBank load_bank(const std::filesystem::path& dir) {
  json doc;
  try {
    doc = json::parse(read_text_file(dir / "bank.json"));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, (dir / "bank.json").string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  if (doc.value("schema", "") != kBankSchema) throw Error(Errc::SchemaError, "bank.json: unexpected schema");
  std::vector<CellRecord> records;
  try {
    for (const auto& j : doc.at("records")) {
      CellRecord r;
      r.id = j.at("id").get<std::int64_t>();
      r.category = j.at("category").get<std::string>();
      r.cell_type = cell_type_from_string(j.at("cell_type").get<std::string>());
      r.area = j.at("area").get<std::int64_t>();
      r.source_image_id = j.at("source_image_id").get<std::string>();
      const auto& b = j.at("source_bbox");
      r.source_bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      r.crop = to_rgb(png::read(dir / j.at("crop").get<std::string>()));
      r.mask = png::read(dir / j.at("mask").get<std::string>());
      if (!j.at("embedding").is_null()) r.embedding = j.at("embedding").get<std::vector<double>>();
      records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("bank.json: ") + e.what());
  }
  return CellBank(std::move(records));
}

}  // namespace saic::cellbank
