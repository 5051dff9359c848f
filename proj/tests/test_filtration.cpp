#include <doctest.h>

#include "saic/filtration.hpp"
#include "saic/reference_backend.hpp"
#include "support.hpp"

using namespace saic;
using namespace saic::filtration;
using backends::Choice;
using backends::Variant;

namespace {

class ScriptedJudge : public backends::JudgeBackend {
 public:
  explicit ScriptedJudge(std::string text) : text_(std::move(text)) {}
  std::vector<std::pair<Raster, Raster>> seen;

 protected:
  std::string do_judge(const Raster& a, const Raster& b, const std::string&) override {
    seen.emplace_back(a, b);
    return text_;
  }

 private:
  std::string text_;
};

composer::CompositionPair random_pair(Rng& rng, const std::string& id) {
  composer::CompositionPair pair;
  pair.region_id = id;
  const auto bg = testing::random_raster(rng, 24, 24, 3, 100, 200);
  pair.region.bbox = {6, 6, 10, 10};
  pair.self_image = bg;
  pair.background_image = bg;
  for (int y = 6; y < 16; ++y) {
    for (int x = 6; x < 16; ++x) {
      for (int c = 0; c < 3; ++c) {
        pair.self_image.at(x, y, c) = static_cast<std::uint8_t>(uniform_below(rng, 256));
        pair.background_image.at(x, y, c) = static_cast<std::uint8_t>(uniform_below(rng, 256));
      }
    }
  }
  return pair;
}

}  // namespace

TEST_SUITE("filtration") {
  TEST_CASE("kept variant follows the presentation order") {
    CHECK(kept_variant(Choice::A, Order::self_first) == Variant::self_style);
    CHECK(kept_variant(Choice::B, Order::self_first) == Variant::background_style);
    CHECK(kept_variant(Choice::A, Order::background_first) == Variant::background_style);
    CHECK(kept_variant(Choice::B, Order::background_first) == Variant::self_style);
  }

  TEST_CASE("images reach the judge in the chosen order") {
    Rng rng(1);
    const auto pair = random_pair(rng, "r1");
    ScriptedJudge judge("Choice: A\nReason: x");
    const auto first = filter_pair(pair, judge, 0, {"p", Order::self_first});
    const auto second = filter_pair(pair, judge, 0, {"p", Order::background_first});
    REQUIRE(judge.seen.size() == 2);
    CHECK(judge.seen[0].first == pair.self_image);
    CHECK(judge.seen[1].first == pair.background_image);
    CHECK(first.kept_variant == Variant::self_style);
    CHECK(second.kept_variant == Variant::background_style);
    CHECK(first.rationale == "x");
  }

  TEST_CASE("reference decisions are independent of presentation order") {
    Rng rng(2);
    backends::ReferenceJudge judge;
    for (int i = 0; i < 100; ++i) {
      const auto pair = random_pair(rng, "r" + std::to_string(i));
      const auto a = filter_pair(pair, judge, 3, {"p", Order::self_first});
      const auto b = filter_pair(pair, judge, 3, {"p", Order::background_first});
      REQUIRE(a.kept_variant == b.kept_variant);
    }
  }

  TEST_CASE("presentation order is a seeded fair coin") {
    int self_first = 0;
    for (int i = 0; i < 2000; ++i) {
      const std::string id = "r" + std::to_string(i);
      const auto o = presentation_order(17, id);
      REQUIRE(o == presentation_order(17, id));
      if (o == Order::self_first) ++self_first;
    }
    // binomial(2000, 0.5): 5 sigma is about 112
    CHECK(self_first > 888);
    CHECK(self_first < 1112);
    int differs = 0;
    for (int i = 0; i < 200; ++i) {
      const std::string id = "r" + std::to_string(i);
      if (presentation_order(17, id) != presentation_order(18, id)) ++differs;
    }
    CHECK(differs > 50);
  }

  TEST_CASE("unparseable verdicts carry the region id") {
    Rng rng(3);
    const auto pair = random_pair(rng, "r000042");
    ScriptedJudge judge("I cannot decide.");
    CHECK_THROWS_WITH_AS(filter_pair(pair, judge, 0, {"p", std::nullopt}), doctest::Contains("r000042"), Error);
  }

  TEST_CASE("stats over 100 results") {
    std::vector<FilteredResult> results(100);
    for (int i = 0; i < 100; ++i) results[static_cast<std::size_t>(i)].kept_variant = i < 64 ? Variant::background_style : Variant::self_style;
    const auto s = aggregate_stats(results);
    CHECK(s.total == 100);
    CHECK(s.background_kept == 64);
    CHECK(s.self_kept == 36);
    CHECK(s.background_ratio() == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(to_json(s)["background_ratio"] == doctest::Approx(0.64));
    CHECK(aggregate_stats({}).background_ratio() == 0.0);
  }

  TEST_CASE("result json round-trip") {
    FilteredResult r{"r7", Variant::self_style, Order::background_first, "sharper", true};
    const auto back = result_from_json(to_json(r));
    CHECK(back.region_id == "r7");
    CHECK(back.kept_variant == Variant::self_style);
    CHECK(back.presentation_order == Order::background_first);
    CHECK(back.rationale == "sharper");
    CHECK(back.fallback);
    CHECK_THROWS_AS(result_from_json(json{{"region_id", "x"}}), Error);
  }

  TEST_CASE("prompt rendering") {
    const auto reg = PromptRegistry::builtin();
    const auto plain = build_prompt(reg, kDefaultTemplate);
    CHECK(plain.find("Choice: A") != std::string::npos);
    CHECK(plain.find("Reason:") != std::string::npos);
    const auto cat = build_prompt(reg, "harmony-v1-category", {{"category", "hsil"}});
    CHECK(cat.find("inserted hsil cell") != std::string::npos);
    CHECK(build_prompt(reg, "harmony-v1-category").find("{category}") != std::string::npos);
    CHECK_THROWS_WITH_AS(build_prompt(reg, "nope"), doctest::Contains("UnknownTemplate"), Error);
  }

  TEST_CASE("shipped registry matches the built-in one") {
    const auto shipped = PromptRegistry::load(std::filesystem::path(SAIC_SOURCE_DIR) / "prompts" / "registry.json");
    CHECK(shipped.to_json() == PromptRegistry::builtin().to_json());
    CHECK(PromptRegistry::from_json(shipped.to_json()).to_json() == shipped.to_json());
    CHECK_THROWS_AS(PromptRegistry::from_json(json{{"schema", "other"}}), Error);
  }

  TEST_CASE("policy names") {
    CHECK(policy_from_string("drop") == UnparseablePolicy::drop);
    CHECK(to_string(policy_from_string("fallback_background")) == "fallback_background");
    CHECK_THROWS_AS(policy_from_string("coin"), Error);
  }
}
