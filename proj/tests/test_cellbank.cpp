#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "saic/cellbank.hpp"
#include "saic/png_io.hpp"
#include "saic/reference_backend.hpp"
#include "support.hpp"

using namespace saic;
using namespace saic::cellbank;

namespace {

CellRecord make_record(std::int64_t id, const std::string& category, CellType type, int area,
                       const std::string& source = "s", std::optional<std::vector<double>> embedding = std::nullopt) {
  CellRecord r;
  r.id = id;
  r.category = category;
  r.cell_type = type;
  r.crop = Raster(area, 1, 3, 100);
  r.mask = Raster(area, 1, 1, 255);
  r.area = area;
  r.source_image_id = source;
  r.source_bbox = {0, 0, area, 1};
  r.embedding = std::move(embedding);
  return r;
}

// Exhaustive scan over every record.
const CellRecord* oracle_candidate(const CellBank& bank, const SelectionQuery& q) {
  const CellRecord* best = nullptr;
  std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
  for (const auto& r : bank.records()) {
    if (r.category != q.category || r.cell_type != q.cell_type) continue;
    if (q.exclude_source && r.source_image_id == *q.exclude_source) continue;
    const auto d = std::llabs(r.area - q.area);
    if (d < best_d || (d == best_d && r.id < best->id)) {
      best = &r;
      best_d = d;
    }
  }
  return best;
}

const CellRecord* oracle_reference(const CellBank& bank, const std::vector<double>& q) {
  const CellRecord* best = nullptr;
  double best_s = -2.0;
  for (const auto& r : bank.records()) {
    const auto& e = *r.embedding;
    const double dot = std::inner_product(q.begin(), q.end(), e.begin(), 0.0);
    const double s = dot / (std::sqrt(std::inner_product(q.begin(), q.end(), q.begin(), 0.0)) *
                            std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0)));
    if (s > best_s || (s == best_s && r.id < best->id)) {
      best = &r;
      best_s = s;
    }
  }
  return best;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("cellbank") {
  TEST_CASE("a single feasible record wins regardless of area") {
    CellBank bank({make_record(1, "lsil", CellType::single_cell, 5), make_record(2, "hsil", CellType::single_cell, 100)});
    CHECK(select_candidate(bank, {"lsil", CellType::single_cell, 1000, std::nullopt}).id == 1);
  }

  TEST_CASE("equal distance ties go to the lower id") {
    CellBank bank({make_record(7, "ascus", CellType::single_cell, 110), make_record(3, "ascus", CellType::single_cell, 90)});
    CHECK(select_candidate(bank, {"ascus", CellType::single_cell, 100, std::nullopt}).id == 3);
    CellBank swapped({make_record(3, "ascus", CellType::single_cell, 110), make_record(7, "ascus", CellType::single_cell, 90)});
    CHECK(select_candidate(swapped, {"ascus", CellType::single_cell, 100, std::nullopt}).id == 3);
  }

  TEST_CASE("equal areas tie to the lower id") {
    CellBank bank({make_record(9, "agc", CellType::clumps, 50), make_record(4, "agc", CellType::clumps, 50),
                   make_record(6, "agc", CellType::clumps, 50)});
    CHECK(select_candidate(bank, {"agc", CellType::clumps, 49, std::nullopt}).id == 4);
    CHECK(select_candidate(bank, {"agc", CellType::clumps, 51, std::nullopt}).id == 4);
  }

  TEST_CASE("excluded sources are skipped") {
    CellBank bank({make_record(1, "scc", CellType::single_cell, 100, "a"), make_record(2, "scc", CellType::single_cell, 140, "b")});
    CHECK(select_candidate(bank, {"scc", CellType::single_cell, 100, std::string("a")}).id == 2);
    CHECK(code_of([&] { select_candidate(bank, {"scc", CellType::clumps, 100, std::nullopt}); }) == Errc::NoMatch);
    CellBank lone({make_record(1, "scc", CellType::single_cell, 100, "a")});
    CHECK(code_of([&] { select_candidate(lone, {"scc", CellType::single_cell, 100, std::string("a")}); }) == Errc::NoMatch);
  }

  TEST_CASE("candidate selection matches the exhaustive oracle") {
    Rng rng(2024);
    const std::vector<std::string> cats = {"flora", "actin", "lsil"};
    const auto bank = testing::random_bank(rng, 600, cats, 0, 30, 20);
    for (int q = 0; q < 500; ++q) {
      SelectionQuery query{cats[uniform_below(rng, cats.size())],
                           uniform_below(rng, 2) ? CellType::clumps : CellType::single_cell,
                           1 + static_cast<std::int64_t>(uniform_below(rng, 1000)), std::nullopt};
      if (uniform_below(rng, 2)) query.exclude_source = "img" + std::to_string(uniform_below(rng, 20));
      const auto* want = oracle_candidate(bank, query);
      if (!want) {
        CHECK_THROWS_AS(select_candidate(bank, query), Error);
        continue;
      }
      const auto& got = select_candidate(bank, query);
      REQUIRE(got.id == want->id);
      REQUIRE(got.category == query.category);
      REQUIRE(got.cell_type == query.cell_type);
    }
  }

  TEST_CASE("cosine similarity") {
    const std::vector<double> a = {0.6, 0.8};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine_similarity(std::vector<double>{1, 2, 2}, std::vector<double>{2, 1, 2}) == doctest::Approx(8.0 / 9.0));
    CHECK(code_of([] { cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}); }) == Errc::ZeroVector);
    CHECK(code_of([] { cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 0}); }) == Errc::LengthMismatch);
  }

  TEST_CASE("style reference self-match and oracle agreement") {
    Rng rng(77);
    const auto bank = testing::random_bank(rng, 500, {"lsil", "hsil"}, 16);
    const auto& target = bank.records()[123];
    CHECK(select_style_reference(bank, *target.embedding).id == target.id);
    for (int q = 0; q < 100; ++q) {
      const auto query = testing::random_unit(rng, 16);
      REQUIRE(select_style_reference(bank, query).id == oracle_reference(bank, query)->id);
    }
  }

  TEST_CASE("style reference ties, constraints and errors") {
    const std::vector<double> e = {1.0, 0.0};
    CellBank bank({make_record(5, "lsil", CellType::single_cell, 3, "a", e), make_record(2, "hsil", CellType::single_cell, 3, "b", e),
                   make_record(8, "lsil", CellType::single_cell, 3, "c", std::vector<double>{0.0, 1.0})});
    CHECK(select_style_reference(bank, e).id == 2);
    CHECK(select_style_reference(bank, e, {std::string("lsil"), std::nullopt}).id == 5);
    CHECK(select_style_reference(bank, e, {std::nullopt, std::string("b")}).id == 5);
    CHECK(code_of([] { select_style_reference(CellBank(), std::vector<double>{1.0}); }) == Errc::EmptyBank);
    CellBank missing({make_record(1, "lsil", CellType::single_cell, 3)});
    CHECK(code_of([&] { select_style_reference(missing, e); }) == Errc::MissingEmbedding);
  }

  TEST_CASE("records must honor their invariants") {
    auto r = make_record(1, "lsil", CellType::single_cell, 4);
    r.area = 3;
    CHECK(code_of([&] { validate_record(r); }) == Errc::SchemaError);
    r = make_record(1, "lsil", CellType::single_cell, 4, "s", std::vector<double>{0.5, 0.5});
    CHECK(code_of([&] { validate_record(r); }) == Errc::SchemaError);
    CHECK(code_of([] {
            CellBank({make_record(1, "a", CellType::single_cell, 1), make_record(1, "b", CellType::single_cell, 1)});
          }) == Errc::SchemaError);
  }

  TEST_CASE("index buckets are sorted by area then id") {
    Rng rng(6);
    const auto bank = testing::random_bank(rng, 300, {"a", "b"}, 0, 6);
    std::size_t seen = 0;
    for (const auto& [key, ids] : bank.index()) {
      seen += ids.size();
      for (std::size_t i = 1; i < ids.size(); ++i) {
        const auto& p = bank.get(ids[i - 1]);
        const auto& c = bank.get(ids[i]);
        REQUIRE((p.area < c.area || (p.area == c.area && p.id < c.id)));
      }
    }
    CHECK(seen == bank.size());
  }

  TEST_CASE("bank targets on a long-tailed 11-category fixture") {
    // long-tailed counts, 50,447 annotations over 11 categories
    const std::map<std::string, int> counts = {{"flora", 320}, {"actin", 340}, {"herps", 380}, {"cand", 460},
                                               {"lsil", 9500}, {"ascus", 11200}, {"scc", 4100}, {"asch", 5800},
                                               {"agc", 1900},  {"trich", 3247},  {"hsil", 13200}};
    BankSamplingConfig s;
    s.total = 824;
    const auto t = bank_targets(counts, s);
    int sum = 0;
    for (const auto& [c, n] : t) {
      CHECK(n >= 68);
      CHECK(n <= 90);
      sum += n;
    }
    CHECK(sum == 824);
    s.seed = 99;
    CHECK(bank_targets(counts, s) == t);
  }

  TEST_CASE("bank targets never exceed availability") {
    BankSamplingConfig s;
    const auto t = bank_targets({{"a", 3}, {"b", 500}}, s);
    CHECK(t.at("a") == 3);
    CHECK(t.at("b") == 90);
  }

  TEST_CASE("build_bank from a fixture dataset") {
    testing::TempDir dir;
    testing::FixtureSpec spec;
    spec.images = 6;
    const auto ds = testing::write_fixture_dataset(dir.path(), spec);
    auto loader = [&](const std::string& id) { return png::read(ds.image_path(*ds.find_image(id))); };
    backends::ReferenceEmbedding embedder(32);
    BankSamplingConfig s;
    s.count_min = 1;
    s.count_max = 2;
    s.seed = 5;
    const auto bank = build_bank(ds, s, loader, nullptr, &embedder);
    CHECK(bank.size() == 2 * spec.categories.size());
    for (const auto& r : bank.records()) {
      CHECK(r.embedding->size() == 32);
      CHECK(r.area == mask_area(r.mask));
    }
    const auto again = build_bank(ds, s, loader, nullptr, &embedder);
    CHECK(dump_stable(bank_to_json(again)) == dump_stable(bank_to_json(bank)));
    s.seed = 6;
    const auto other = build_bank(ds, s, loader, nullptr, &embedder);
    CHECK(other.size() == bank.size());
  }

  TEST_CASE("a singleton dataset yields a singleton bank") {
    testing::TempDir dir;
    testing::FixtureSpec spec;
    spec.images = 1;
    spec.cells_per_image = 1;
    const auto ds = testing::write_fixture_dataset(dir.path(), spec);
    auto loader = [&](const std::string& id) { return png::read(ds.image_path(*ds.find_image(id))); };
    const auto bank = build_bank(ds, {}, loader);
    CHECK(bank.size() == 1);
    CHECK(bank.index().size() == 1);
  }

  TEST_CASE("build_bank errors") {
    dataio::Dataset empty;
    auto loader = [](const std::string&) { return Raster(8, 8, 3); };
    CHECK(code_of([&] { build_bank(empty, {}, loader); }) == Errc::EmptyDataset);
    testing::TempDir dir;
    testing::FixtureSpec spec;
    spec.images = 2;
    spec.with_masks = false;
    const auto ds = testing::write_fixture_dataset(dir.path(), spec);
    auto png_loader = [&](const std::string& id) { return png::read(ds.image_path(*ds.find_image(id))); };
    CHECK(code_of([&] { build_bank(ds, {}, png_loader); }) == Errc::MissingMask);
    backends::ReferenceSegmentation seg;
    CHECK(build_bank(ds, {}, png_loader, &seg).size() == ds.annotations.size());
  }

  TEST_CASE("bank directory round-trip") {
    Rng rng(31);
    const auto bank = testing::random_bank(rng, 40, {"lsil", "cand"}, 8, 12);
    testing::TempDir dir;
    save_bank(bank, dir.path());
    CHECK(std::filesystem::exists(dir / "crops/1000.png"));
    CHECK(std::filesystem::exists(dir / "masks/1000.png"));
    const auto back = load_bank(dir.path());
    REQUIRE(back.size() == bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) {
      const auto& a = bank.records()[i];
      const auto& b = back.records()[i];
      CHECK(a.crop == b.crop);
      CHECK(a.mask == b.mask);
      CHECK(a.source_bbox == b.source_bbox);
      for (std::size_t k = 0; k < a.embedding->size(); ++k) CHECK((*b.embedding)[k] == doctest::Approx((*a.embedding)[k]).epsilon(1e-15));
    }
    CHECK(dump_stable(bank_to_json(back)) == dump_stable(bank_to_json(bank)));
  }

  TEST_CASE("loading a damaged bank") {
    testing::TempDir dir;
    write_text_file(dir / "bank.json", "{not json");
    CHECK(code_of([&] { load_bank(dir.path()); }) == Errc::ParseError);
    write_text_file(dir / "bank.json", R"({"schema": "other"})");
    CHECK(code_of([&] { load_bank(dir.path()); }) == Errc::SchemaError);
  }

  TEST_CASE("cell canvas is square and centered") {
    Raster crop(6, 2, 3, 40);
    Raster mask(6, 2, 1, 255);
    const auto [c, m] = cell_canvas(crop, mask);
    CHECK(c.width == 6);
    CHECK(c.height == 6);
    CHECK(mask_area(m) == 12);
  }
}
