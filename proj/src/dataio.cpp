#include "saic/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "saic/cellbank.hpp"
#include "saic/png_io.hpp"

namespace saic::dataio {

namespace fs = std::filesystem;

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> kCategories = {"flora", "actin", "herps", "cand",  "lsil", "ascus",
                                                       "scc",   "asch",  "agc",   "trich", "hsil"};
  return kCategories;
}

const ImageEntry* Dataset::find_image(const std::string& id) const {
  auto it = std::find_if(images.begin(), images.end(), [&](const ImageEntry& e) { return e.id == id; });
  return it == images.end() ? nullptr : &*it;
}

fs::path Dataset::image_path(const ImageEntry& image) const {
  const fs::path p(image.path);
  return p.is_absolute() ? p : root / p;
}

void Dataset::validate() const {
  std::map<std::string, const ImageEntry*> by_id;
  for (const auto& img : images) {
    if (img.width <= 0 || img.height <= 0) throw Error(Errc::SchemaError, "images[" + img.id + "].width/height must be positive");
    if (!by_id.emplace(img.id, &img).second) throw Error(Errc::SchemaError, "images: duplicate id '" + img.id + "'");
  }
  const std::set<std::string> cats(categories.begin(), categories.end());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    auto it = by_id.find(a.image_id);
    if (it == by_id.end()) throw Error(Errc::SchemaError, where + ".image_id: unknown image '" + a.image_id + "'");
    if (!a.bbox.inside(it->second->width, it->second->height)) {
      throw Error(Errc::SchemaError, where + ".bbox: outside image bounds");
    }
    if (a.area <= 0) throw Error(Errc::SchemaError, where + ".area must be positive");
    if (!cats.count(a.category)) throw Error(Errc::SchemaError, where + ".category: undeclared '" + a.category + "'");
    if (const auto* rle = std::get_if<RleMask>(&a.mask)) {
      if (rle->width != it->second->width || rle->height != it->second->height) {
        throw Error(Errc::SchemaError, where + ".mask.rle.size: does not match image size");
      }
    }
  }
}

Format format_from_string(const std::string& text) {
  if (text == "canonical_json" || text == "canonical") return Format::canonical_json;
  if (text == "coco_json" || text == "coco") return Format::coco_json;
  if (text == "yolo_txt" || text == "yolo") return Format::yolo_txt;
  throw Error(Errc::ConfigError, "unknown dataset format '" + text + "'");
}

std::string to_string(Format format) {
  switch (format) {
    case Format::canonical_json: return "canonical_json";
    case Format::coco_json: return "coco_json";
    case Format::yolo_txt: return "yolo_txt";
  }
  return "canonical_json";
}

namespace {

json parse_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

json mask_to_json(const MaskShape& mask) {
  if (const auto* poly = std::get_if<PolygonMask>(&mask)) return {{"polygon", poly->rings}};
  if (const auto* rle = std::get_if<RleMask>(&mask)) {
    return {{"rle", {{"size", {rle->height, rle->width}}, {"counts", rle->counts}}}};
  }
  return nullptr;
}

RleMask rle_from_json(const json& j, const std::string& where) {
  RleMask rle;
  const auto& size = j.at("size");
  rle.height = size.at(0).get<int>();
  rle.width = size.at(1).get<int>();
  const auto& counts = j.at("counts");
  if (counts.is_string()) return decode_coco_rle_string(counts.get<std::string>(), rle.height, rle.width);
  if (!counts.is_array()) throw Error(Errc::SchemaError, where + ".counts must be a list or string");
  rle.counts = counts.get<std::vector<std::uint32_t>>();
  return rle;
}

MaskShape mask_from_json(const json& j, const std::string& where) {
  if (j.is_null()) return std::monostate{};
  if (j.contains("polygon")) return PolygonMask{j.at("polygon").get<std::vector<std::vector<double>>>()};
  if (j.contains("rle")) return rle_from_json(j.at("rle"), where + ".rle");
  throw Error(Errc::SchemaError, where + ": expected null, {polygon} or {rle}");
}

Bbox bbox_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::SchemaError, where + ": bbox must be [x, y, w, h]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

// Required field accessor that names the field on failure.
const json& req(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw Error(Errc::SchemaError, where + "." + key + ": missing");
  return obj.at(key);
}

std::string resolve_category(const std::string& raw, const ImportOptions& options, const std::string& where) {
  if (options.category_map) {
    auto it = options.category_map->find(raw);
    if (it != options.category_map->end()) return it->second;
  }
  const auto& known = options.known_categories;
  if (std::find(known.begin(), known.end(), raw) == known.end()) {
    throw Error(Errc::SchemaError, where + ": unknown category '" + raw + "' (supply a category map)");
  }
  return raw;
}

Dataset import_canonical(const fs::path& path) {
  return from_canonical_json(parse_json_file(path), path.parent_path());
}

Dataset import_coco(const fs::path& path, const ImportOptions& options) {
  const json doc = parse_json_file(path);
  Dataset ds;
  ds.root = path.parent_path();
  std::map<std::int64_t, std::string> image_ids;
  std::map<std::int64_t, std::string> category_names;
  try {
    for (std::size_t i = 0; i < req(doc, "categories", "coco").size(); ++i) {
      const auto& c = doc["categories"][i];
      const std::string where = "categories[" + std::to_string(i) + "]";
      const auto name = resolve_category(req(c, "name", where).get<std::string>(), options, where + ".name");
      category_names[req(c, "id", where).get<std::int64_t>()] = name;
      if (std::find(ds.categories.begin(), ds.categories.end(), name) == ds.categories.end()) ds.categories.push_back(name);
    }
    for (std::size_t i = 0; i < req(doc, "images", "coco").size(); ++i) {
      const auto& im = doc["images"][i];
      const std::string where = "images[" + std::to_string(i) + "]";
      const auto num_id = req(im, "id", where).get<std::int64_t>();
      ImageEntry e;
      e.id = im.contains("saic_id") ? im["saic_id"].get<std::string>() : std::to_string(num_id);
      e.path = req(im, "file_name", where).get<std::string>();
      e.width = req(im, "width", where).get<int>();
      e.height = req(im, "height", where).get<int>();
      image_ids[num_id] = e.id;
      ds.images.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < req(doc, "annotations", "coco").size(); ++i) {
      const auto& an = doc["annotations"][i];
      const std::string where = "annotations[" + std::to_string(i) + "]";
      Annotation a;
      auto img = image_ids.find(req(an, "image_id", where).get<std::int64_t>());
      if (img == image_ids.end()) throw Error(Errc::SchemaError, where + ".image_id: unknown image");
      a.image_id = img->second;
      auto cat = category_names.find(req(an, "category_id", where).get<std::int64_t>());
      if (cat == category_names.end()) throw Error(Errc::SchemaError, where + ".category_id: unknown category");
      a.category = cat->second;
      const auto& b = req(an, "bbox", where);
      if (!b.is_array() || b.size() != 4) throw Error(Errc::SchemaError, where + ".bbox: must be [x, y, w, h]");
      const auto* image = ds.find_image(a.image_id);
      const double bx = b[0].get<double>(), by = b[1].get<double>(), bw = b[2].get<double>(), bh = b[3].get<double>();
      const int x0 = std::clamp(static_cast<int>(std::floor(bx)), 0, image->width - 1);
      const int y0 = std::clamp(static_cast<int>(std::floor(by)), 0, image->height - 1);
      const int x1 = std::clamp(static_cast<int>(std::ceil(bx + bw)), x0 + 1, image->width);
      const int y1 = std::clamp(static_cast<int>(std::ceil(by + bh)), y0 + 1, image->height);
      a.bbox = {x0, y0, x1 - x0, y1 - y0};
      std::string type = "single_cell";
      if (an.contains("cell_type")) {
        type = an["cell_type"].get<std::string>();
      } else if (an.contains("attributes") && an["attributes"].contains("cell_type")) {
        type = an["attributes"]["cell_type"].get<std::string>();
      }
      a.cell_type = cell_type_from_string(type);
      if (an.contains("segmentation")) {
        const auto& seg = an["segmentation"];
        if (seg.is_array() && !seg.empty()) {
          a.mask = PolygonMask{seg.get<std::vector<std::vector<double>>>()};
        } else if (seg.is_object()) {
          a.mask = rle_from_json(seg, where + ".segmentation");
        }
      }
      const double area = an.value("area", 0.0);
      a.area = area > 0 ? static_cast<std::int64_t>(std::llround(area)) : static_cast<std::int64_t>(a.bbox.w) * a.bbox.h;
      if (a.area <= 0) a.area = 1;
      ds.annotations.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

Dataset import_yolo(const fs::path& dir, const ImportOptions& options) {
  if (!fs::is_directory(dir)) throw Error(Errc::ParseError, dir.string() + ": not a YOLO dataset directory");
  Dataset ds;
  ds.root = dir;
  std::vector<std::string> names = options.known_categories;
  if (fs::exists(dir / "classes.txt")) {
    names.clear();
    std::istringstream in(read_text_file(dir / "classes.txt"));
    std::string line;
    while (std::getline(in, line)) {
      const auto toks = split_ws(line);
      if (!toks.empty()) names.push_back(toks.front());
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = resolve_category(names[i], options, "classes.txt:" + std::to_string(i + 1));

  if (fs::exists(dir / "images.json")) {
    const json doc = parse_json_file(dir / "images.json");
    try {
      for (const auto& im : doc.at("images")) {
        ds.images.push_back({im.at("id").get<std::string>(), im.at("path").get<std::string>(), im.at("width").get<int>(),
                             im.at("height").get<int>()});
      }
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaError, std::string("images.json: ") + e.what());
    }
  } else {
    std::vector<fs::path> files;
    if (fs::is_directory(dir / "images")) {
      for (const auto& entry : fs::directory_iterator(dir / "images")) {
        if (entry.path().extension() == ".png") files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto header = png::read_header(f);
      ds.images.push_back({f.stem().string(), fs::relative(f, dir).generic_string(), header.width, header.height});
    }
  }
  std::set<std::string> used;
  for (const auto& img : ds.images) {
    const fs::path label = dir / "labels" / (img.id + ".txt");
    if (!fs::exists(label)) continue;
    std::istringstream in(read_text_file(label));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (split_ws(line).empty()) continue;
      const std::string where = label.string() + ":" + std::to_string(lineno);
      std::pair<int, Bbox> parsed;
      try {
        parsed = parse_yolo_line(line, img.width, img.height);
      } catch (const Error& e) {
        throw Error(Errc::ParseError, where + ": " + e.what());
      }
      if (parsed.first < 0 || static_cast<std::size_t>(parsed.first) >= names.size()) {
        throw Error(Errc::SchemaError, where + ": class index " + std::to_string(parsed.first) + " has no name");
      }
      Annotation a;
      a.image_id = img.id;
      a.bbox = parsed.second;
      a.category = names[static_cast<std::size_t>(parsed.first)];
      a.area = static_cast<std::int64_t>(a.bbox.w) * a.bbox.h;
      ds.annotations.push_back(std::move(a));
    }
  }
  ds.categories = names;
  ds.validate();
  return ds;
}

std::string rebased(const Dataset& dataset, const ImageEntry& img, const fs::path& target_dir) {
  const fs::path p(img.path);
  if (p.is_absolute()) return img.path;
  std::error_code ec;
  const auto src = fs::weakly_canonical(dataset.root.empty() ? fs::path(".") : dataset.root, ec);
  const auto dst = fs::weakly_canonical(target_dir.empty() ? fs::path(".") : target_dir, ec);
  if (src == dst) return img.path;
  return fs::relative(src / p, dst, ec).generic_string();
}

Dataset with_paths_rebased(const Dataset& dataset, const fs::path& target_dir) {
  Dataset out = dataset;
  for (auto& img : out.images) img.path = rebased(dataset, img, target_dir);
  out.root = target_dir;
  return out;
}

void ensure_parent(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
}

}  // namespace

json to_canonical_json(const Dataset& dataset) {
  json images = json::array();
  for (const auto& img : dataset.images) {
    images.push_back({{"id", img.id}, {"path", img.path}, {"width", img.width}, {"height", img.height}});
  }
  json anns = json::array();
  for (const auto& a : dataset.annotations) {
    anns.push_back({{"image_id", a.image_id},
                    {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                    {"category", a.category},
                    {"cell_type", to_string(a.cell_type)},
                    {"area", a.area},
                    {"mask", mask_to_json(a.mask)}});
  }
  return {{"schema", kDatasetSchema}, {"categories", dataset.categories}, {"images", images}, {"annotations", anns}};
}

Dataset from_canonical_json(const json& doc, const fs::path& root) {
  Dataset ds;
  ds.root = root;
  if (!doc.is_object() || doc.value("schema", "") != kDatasetSchema) {
    throw Error(Errc::SchemaError, std::string("schema: expected \"") + kDatasetSchema + "\"");
  }
  try {
    ds.categories = req(doc, "categories", "dataset").get<std::vector<std::string>>();
    const auto& images = req(doc, "images", "dataset");
    for (std::size_t i = 0; i < images.size(); ++i) {
      const std::string where = "images[" + std::to_string(i) + "]";
      const auto& im = images[i];
      ds.images.push_back({req(im, "id", where).get<std::string>(), req(im, "path", where).get<std::string>(),
                           req(im, "width", where).get<int>(), req(im, "height", where).get<int>()});
    }
    const auto& anns = req(doc, "annotations", "dataset");
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const std::string where = "annotations[" + std::to_string(i) + "]";
      const auto& an = anns[i];
      Annotation a;
      a.image_id = req(an, "image_id", where).get<std::string>();
      a.bbox = bbox_from_json(req(an, "bbox", where), where + ".bbox");
      a.category = req(an, "category", where).get<std::string>();
      a.cell_type = cell_type_from_string(req(an, "cell_type", where).get<std::string>());
      a.area = req(an, "area", where).get<std::int64_t>();
      a.mask = an.contains("mask") ? mask_from_json(an["mask"], where + ".mask") : MaskShape{};
      ds.annotations.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("dataset: ") + e.what());
  }
  ds.validate();
  return ds;
}

Dataset import_dataset(const fs::path& path, Format format, const ImportOptions& options) {
  if (!fs::exists(path)) throw Error(Errc::ParseError, path.string() + ": no such file or directory");
  switch (format) {
    case Format::canonical_json: return import_canonical(path);
    case Format::coco_json: return import_coco(path, options);
    case Format::yolo_txt: return import_yolo(path, options);
  }
  throw Error(Errc::ConfigError, "unsupported format");
}

void export_dataset(const Dataset& dataset, Format format, const fs::path& path) {
  dataset.validate();
  try {
    switch (format) {
      case Format::canonical_json: {
        ensure_parent(path);
        write_text_file(path, dump_stable(to_canonical_json(with_paths_rebased(dataset, path.parent_path()))));
        return;
      }
      case Format::coco_json: {
        ensure_parent(path);
        const Dataset ds = with_paths_rebased(dataset, path.parent_path());
        json cats = json::array();
        std::map<std::string, int> cat_ids;
        for (std::size_t i = 0; i < ds.categories.size(); ++i) {
          cat_ids[ds.categories[i]] = static_cast<int>(i + 1);
          cats.push_back({{"id", i + 1}, {"name", ds.categories[i]}});
        }
        json images = json::array();
        std::map<std::string, int> image_ids;
        for (std::size_t i = 0; i < ds.images.size(); ++i) {
          const auto& img = ds.images[i];
          image_ids[img.id] = static_cast<int>(i + 1);
          images.push_back({{"id", i + 1}, {"saic_id", img.id}, {"file_name", img.path}, {"width", img.width}, {"height", img.height}});
        }
        json anns = json::array();
        for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
          const auto& a = ds.annotations[i];
          json seg = json::array();
          if (const auto* poly = std::get_if<PolygonMask>(&a.mask)) seg = poly->rings;
          if (const auto* rle = std::get_if<RleMask>(&a.mask)) seg = {{"size", {rle->height, rle->width}}, {"counts", rle->counts}};
          anns.push_back({{"id", i + 1},
                          {"image_id", image_ids.at(a.image_id)},
                          {"category_id", cat_ids.at(a.category)},
                          {"bbox", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                          {"area", a.area},
                          {"iscrowd", 0},
                          {"cell_type", to_string(a.cell_type)},
                          {"segmentation", seg}});
        }
        write_text_file(path, dump_stable({{"images", images}, {"annotations", anns}, {"categories", cats}}));
        return;
      }
      case Format::yolo_txt: {
        std::error_code ec;
        fs::create_directories(path / "labels", ec);
        if (ec) throw Error(Errc::IoError, "cannot create " + (path / "labels").string() + ": " + ec.message());
        const Dataset ds = with_paths_rebased(dataset, path);
        std::string classes;
        for (const auto& c : ds.categories) classes += c + "\n";
        write_text_file(path / "classes.txt", classes);
        json images = json::array();
        std::map<std::string, std::string> labels;
        for (const auto& img : ds.images) {
          images.push_back({{"id", img.id}, {"path", img.path}, {"width", img.width}, {"height", img.height}});
          labels[img.id];
        }
        for (const auto& a : ds.annotations) {
          const auto* img = ds.find_image(a.image_id);
          const auto cls = std::find(ds.categories.begin(), ds.categories.end(), a.category) - ds.categories.begin();
          labels[a.image_id] += format_yolo_line(static_cast<int>(cls), a.bbox, img->width, img->height) + "\n";
        }
        for (const auto& [id, text] : labels) write_text_file(path / "labels" / (id + ".txt"), text);
        write_text_file(path / "images.json", dump_stable({{"images", images}}));
        return;
      }
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(Errc::IoError, e.what());
  }
}

std::string format_yolo_line(int class_index, const Bbox& box, int image_w, int image_h) {
  const double cx = (box.x + box.w / 2.0) / image_w;
  const double cy = (box.y + box.h / 2.0) / image_h;
  const double nw = static_cast<double>(box.w) / image_w;
  const double nh = static_cast<double>(box.h) / image_h;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f", class_index, cx, cy, nw, nh);
  return buf;
}

std::pair<int, Bbox> parse_yolo_line(const std::string& line, int image_w, int image_h) {
  const auto toks = split_ws(line);
  if (toks.size() != 5) throw Error(Errc::ParseError, "expected 'class cx cy w h', got " + std::to_string(toks.size()) + " fields");
  int cls = 0;
  double v[4];
  try {
    std::size_t used = 0;
    cls = std::stoi(toks[0], &used);
    if (used != toks[0].size()) throw std::invalid_argument("class");
    for (int i = 0; i < 4; ++i) {
      v[i] = std::stod(toks[static_cast<std::size_t>(i + 1)], &used);
      if (used != toks[static_cast<std::size_t>(i + 1)].size()) throw std::invalid_argument("coord");
    }
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "non-numeric field in '" + line + "'");
  }
  for (double c : v) {
    if (!(c >= -1e-6 && c <= 1.0 + 1e-6)) throw Error(Errc::ParseError, "normalized coordinate out of [0, 1]");
  }
  const double half_w = v[2] * image_w / 2.0;
  const double half_h = v[3] * image_h / 2.0;
  int x0 = static_cast<int>(std::lround(v[0] * image_w - half_w));
  int x1 = static_cast<int>(std::lround(v[0] * image_w + half_w));
  int y0 = static_cast<int>(std::lround(v[1] * image_h - half_h));
  int y1 = static_cast<int>(std::lround(v[1] * image_h + half_h));
  x0 = std::clamp(x0, 0, image_w - 1);
  y0 = std::clamp(y0, 0, image_h - 1);
  x1 = std::clamp(x1, x0 + 1, image_w);
  y1 = std::clamp(y1, y0 + 1, image_h);
  return {cls, Bbox{x0, y0, x1 - x0, y1 - y0}};
}

namespace {

bool inside_ring(const std::vector<double>& ring, double px, double py) {
  bool in = false;
  const std::size_t n = ring.size() / 2;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = ring[2 * i], yi = ring[2 * i + 1];
    const double xj = ring[2 * j], yj = ring[2 * j + 1];
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

}  // namespace

Raster rasterize_mask(const Annotation& a) {
  if (!a.has_mask()) return {};
  Raster mask(a.bbox.w, a.bbox.h, 1, 0);
  if (const auto* poly = std::get_if<PolygonMask>(&a.mask)) {
    for (int y = 0; y < a.bbox.h; ++y) {
      for (int x = 0; x < a.bbox.w; ++x) {
        const double px = a.bbox.x + x + 0.5;
        const double py = a.bbox.y + y + 0.5;
        for (const auto& ring : poly->rings) {
          if (ring.size() >= 6 && inside_ring(ring, px, py)) {
            mask.at(x, y) = 255;
            break;
          }
        }
      }
    }
  } else if (const auto* rle = std::get_if<RleMask>(&a.mask)) {
    std::int64_t pos = 0;
    const std::int64_t total = static_cast<std::int64_t>(rle->width) * rle->height;
    for (std::size_t k = 0; k < rle->counts.size() && pos < total; ++k) {
      const std::int64_t len = rle->counts[k];
      if (k % 2 == 1) {
        for (std::int64_t p = pos; p < std::min(total, pos + len); ++p) {
          const int row = static_cast<int>(p % rle->height);
          const int col = static_cast<int>(p / rle->height);
          if (a.bbox.contains(col, row)) mask.at(col - a.bbox.x, row - a.bbox.y) = 255;
        }
      }
      pos += len;
    }
  }
  return mask;
}

RleMask decode_coco_rle_string(const std::string& s, int height, int width) {
  RleMask rle{height, width, {}};
  std::vector<std::int64_t> cnts;
  std::size_t p = 0;
  while (p < s.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw Error(Errc::SchemaError, "truncated compressed RLE string");
      const std::int64_t c = static_cast<std::int64_t>(s[p]) - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * k));
    }
    if (cnts.size() > 2) x += cnts[cnts.size() - 2];
    if (x < 0) throw Error(Errc::SchemaError, "negative run in compressed RLE string");
    cnts.push_back(x);
  }
  rle.counts.assign(cnts.begin(), cnts.end());
  return rle;
}

Dataset sample_subset(const Dataset& dataset, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(Errc::InvalidRatio, "ratio must lie in (0, 1]");
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) by_category[dataset.annotations[i].category].push_back(i);
  std::vector<bool> keep(dataset.annotations.size(), false);
  for (auto& [category, idx] : by_category) {
    const auto n = idx.size();
    auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    Rng rng(substream_seed(seed, "subset:" + category));
    deterministic_shuffle(idx, rng);
    for (std::size_t i = 0; i < k; ++i) keep[idx[i]] = true;
  }
  Dataset out;
  out.root = dataset.root;
  out.categories = dataset.categories;
  std::set<std::string> kept_images;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    if (!keep[i]) continue;
    out.annotations.push_back(dataset.annotations[i]);
    kept_images.insert(dataset.annotations[i].image_id);
  }
  for (const auto& img : dataset.images) {
    if (kept_images.count(img.id)) out.images.push_back(img);
  }
  return out;
}

Targeting targeting_from_string(const std::string& text) {
  if (text == "uniform") return Targeting::uniform;
  if (text == "tail_weighted") return Targeting::tail_weighted;
  throw Error(Errc::ConfigError, "unknown targeting '" + text + "'");
}

std::string to_string(Targeting t) { return t == Targeting::uniform ? "uniform" : "tail_weighted"; }

std::size_t planned_entry_count(double expand_ratio, std::size_t image_count) {
  if (!(expand_ratio >= 0.0) || !std::isfinite(expand_ratio)) throw Error(Errc::InvalidRatio, "expand_ratio must be >= 0");
  const double x = expand_ratio * static_cast<double>(image_count);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

AugmentationPlan plan_augmentation(const Dataset& dataset, const cellbank::CellBank& bank, double expand_ratio,
                                   Targeting targeting, int tail_threshold, std::uint64_t seed) {
  if (bank.empty()) throw Error(Errc::EmptyBank, "cannot plan against an empty bank");
  AugmentationPlan plan;
  plan.seed = seed;
  plan.expand_ratio = expand_ratio;
  plan.targeting = targeting;
  plan.tail_threshold = tail_threshold;
  const std::size_t total = planned_entry_count(expand_ratio, dataset.images.size());

  std::map<std::string, std::int64_t> counts;
  std::map<std::string, std::vector<std::size_t>> eligible;
  for (std::size_t i = 0; i < dataset.annotations.size(); ++i) {
    const auto& a = dataset.annotations[i];
    ++counts[a.category];
    if (bank.has_bucket(a.category, a.cell_type)) eligible[a.category].push_back(i);
  }
  if (eligible.empty()) throw Error(Errc::NoRegions, "no annotated region has a matching bank bucket");
  if (total == 0) return plan;

  std::map<std::string, double> weight;
  for (const auto& [c, idx] : eligible) {
    weight[c] = targeting == Targeting::uniform ? static_cast<double>(idx.size()) : 1.0 / static_cast<double>(counts[c]);
  }
  if (targeting == Targeting::tail_weighted) {
    double tail = 0.0;
    double head = 0.0;
    for (const auto& [c, w] : weight) (counts[c] < tail_threshold ? tail : head) += w;
    if (tail > 0.0 && head > 0.0 && tail < head) {
      // lift tail categories to at least half of the entries
      for (auto& [c, w] : weight) {
        if (counts[c] < tail_threshold) w *= head / tail;
      }
    }
  }
  double wsum = 0.0;
  for (const auto& [c, w] : weight) wsum += w;

  // Largest-remainder apportionment of `total` entries.
  std::vector<std::pair<std::string, std::size_t>> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (const auto& [c, w] : weight) {
    const double exact = static_cast<double>(total) * w / wsum;
    const auto base = static_cast<std::size_t>(std::floor(exact));
    remainders.emplace_back(exact - static_cast<double>(base), quota.size());
    quota.emplace_back(c, base);
    assigned += base;
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++quota[remainders[i % remainders.size()].second].second;

  for (const auto& [c, q] : quota) {
    auto idx = eligible[c];
    Rng rng(substream_seed(seed, "plan:" + c));
    deterministic_shuffle(idx, rng);
    for (std::size_t k = 0; k < q; ++k) {
      const auto& a = dataset.annotations[idx[k % idx.size()]];
      PlanEntry e;
      e.background_image_id = a.image_id;
      e.annotation_index = idx[k % idx.size()];
      e.bbox = a.bbox;
      e.category = a.category;
      e.cell_type = a.cell_type;
      e.area = a.area;
      plan.entries.push_back(std::move(e));
    }
  }
  Rng order(substream_seed(seed, "plan:order"));
  deterministic_shuffle(plan.entries, order);
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "r%06zu", i);
    plan.entries[i].region_id = buf;
  }
  return plan;
}

json plan_to_json(const AugmentationPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({{"region_id", e.region_id},
                       {"background_image_id", e.background_image_id},
                       {"annotation_index", e.annotation_index},
                       {"bbox", {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}},
                       {"query", {{"category", e.category}, {"cell_type", to_string(e.cell_type)}, {"area", e.area}}}});
  }
  return {{"schema", kPlanSchema},
          {"seed", plan.seed},
          {"expand_ratio", plan.expand_ratio},
          {"targeting", to_string(plan.targeting)},
          {"tail_threshold", plan.tail_threshold},
          {"entries", entries}};
}

AugmentationPlan plan_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kPlanSchema) throw Error(Errc::SchemaError, "plan: unexpected schema");
  AugmentationPlan plan;
  try {
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.expand_ratio = doc.at("expand_ratio").get<double>();
    plan.targeting = targeting_from_string(doc.at("targeting").get<std::string>());
    plan.tail_threshold = doc.at("tail_threshold").get<int>();
    for (const auto& j : doc.at("entries")) {
      PlanEntry e;
      e.region_id = j.at("region_id").get<std::string>();
      e.background_image_id = j.at("background_image_id").get<std::string>();
      e.annotation_index = j.at("annotation_index").get<std::size_t>();
      e.bbox = bbox_from_json(j.at("bbox"), "entries.bbox");
      const auto& q = j.at("query");
      e.category = q.at("category").get<std::string>();
      e.cell_type = cell_type_from_string(q.at("cell_type").get<std::string>());
      e.area = q.at("area").get<std::int64_t>();
      plan.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("plan: ") + e.what());
  }
  return plan;
}

}  // namespace saic::dataio
