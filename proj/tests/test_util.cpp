#include <doctest.h>

#include <atomic>
#include <set>

#include "saic/png_io.hpp"
#include "saic/util.hpp"
#include "support.hpp"

using namespace saic;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_SUITE("util") {
  TEST_CASE("base64 test vectors") {
    CHECK(base64_encode(bytes_of("")) == "");
    CHECK(base64_encode(bytes_of("f")) == "Zg==");
    CHECK(base64_encode(bytes_of("fo")) == "Zm8=");
    CHECK(base64_encode(bytes_of("foobar")) == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYg==") == bytes_of("foob"));
    CHECK_THROWS_AS(base64_decode("Zm9v!"), Error);
    Rng rng(1);
    for (int n = 0; n < 64; ++n) {
      std::vector<std::uint8_t> v(static_cast<std::size_t>(n));
      for (auto& b : v) b = static_cast<std::uint8_t>(uniform_below(rng, 256));
      REQUIRE(base64_decode(base64_encode(v)) == v);
    }
  }

  TEST_CASE("sha256 test vectors") {
    CHECK(sha256_hex(std::string_view("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string_view("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("named substreams") {
    CHECK(substream_seed(1, "plan") == substream_seed(1, "plan"));
    CHECK(substream_seed(1, "plan") != substream_seed(1, "shuffle"));
    CHECK(substream_seed(1, "plan") != substream_seed(2, "plan"));
    CHECK(substream_seed(1, "plan", 0) != substream_seed(1, "plan", 1));
  }

  TEST_CASE("bounded integers and shuffles") {
    Rng rng(2);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) {
      const auto v = uniform_below(rng, 7);
      REQUIRE(v < 7);
      ++hist[v];
    }
    for (int h : hist) CHECK(h > 800);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
    auto w = v;
    Rng a(3);
    deterministic_shuffle(w, a);
    CHECK(std::set<int>(w.begin(), w.end()).size() == 50);
    CHECK(w != v);
    auto u = v;
    Rng b(3);
    deterministic_shuffle(u, b);
    CHECK(u == w);
  }

  TEST_CASE("stable json text") {
    const json j = json::parse(R"({"b": 1, "a": {"d": [1, 2], "c": null}})");
    const auto text = dump_stable(j);
    CHECK(text == "{\n  \"a\": {\n    \"c\": null,\n    \"d\": [\n      1,\n      2\n    ]\n  },\n  \"b\": 1\n}\n");
    CHECK(dump_stable(json::parse(text)) == text);
  }

  TEST_CASE("parallel_for visits each index once") {
    for (int workers : {0, 1, 3, 16}) {
      std::vector<std::atomic<int>> seen(257);
      parallel_for(seen.size(), workers, [&](std::size_t i) { ++seen[i]; });
      for (const auto& s : seen) REQUIRE(s.load() == 1);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL("called on empty range"); });
  }

  TEST_CASE("png round-trip and header") {
    testing::TempDir tmp;
    Rng rng(4);
    for (int c : {1, 3}) {
      const auto img = testing::random_raster(rng, 13, 7, c);
      CHECK(png::decode(png::encode(img)) == img);
      png::write(tmp / "x.png", img);
      CHECK(png::read(tmp / "x.png") == img);
      const auto h = png::read_header(tmp / "x.png");
      CHECK(h.width == 13);
      CHECK(h.height == 7);
    }
    CHECK_THROWS_AS(png::decode(bytes_of("not a png")), Error);
    CHECK_THROWS_AS(png::read(tmp / "missing.png"), Error);
  }

  TEST_CASE("text files") {
    testing::TempDir tmp;
    write_text_file(tmp / "a" / "b.txt", "hello");
    CHECK(read_text_file(tmp / "a" / "b.txt") == "hello");
    CHECK_THROWS_AS(read_text_file(tmp / "none"), Error);
  }
}
