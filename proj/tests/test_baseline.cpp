#include <doctest.h>

#include "avexp/baseline.hpp"
#include "oracles.hpp"

using namespace avexp;

TEST_CASE("dictionary prefers the most frequent value") {
  const auto kb = build_kb({{"t", "color", "red"}, {"t", "color", "red"}, {"t", "color", "red"},
                            {"t", "color", "red"}, {"t", "color", "red"}, {"t", "color", "blue"},
                            {"t", "color", "blue"}});
  CHECK(dictionary_extract({"blue", "and", "red", "shirt"}, "color", kb) == TokenList{"red"});
  CHECK(dictionary_extract({"blue", "shirt"}, "color", kb) == TokenList{"blue"});
  CHECK_FALSE(dictionary_extract({"green"}, "color", kb));
  CHECK_FALSE(dictionary_extract({"red"}, "brand", kb));
}

TEST_CASE("dictionary matches whole token sequences only") {
  const auto kb = build_kb({{"t", "material", "pu"}, {"t", "color", "dark blue"}});
  CHECK_FALSE(dictionary_extract({"putter"}, "material", kb));
  CHECK_FALSE(dictionary_extract({"blue", "dark"}, "color", kb));
  CHECK(dictionary_extract({"a", "dark", "blue"}, "color", kb) == TokenList{"dark", "blue"});
}

TEST_CASE("dictionary agrees with the max-count oracle") {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    std::vector<CleanTuple> train;
    for (int i = 0; i < 200; ++i) {
      const auto v = rng.below(12);
      train.push_back({"t", "a" + std::to_string(rng.below(4)),
                       v == 0 ? std::nullopt
                              : std::optional<std::string>(v > 8 ? "w" + std::to_string(v) + " x"
                                                                 : "w" + std::to_string(v))});
    }
    const auto kb = build_kb(train);
    for (int i = 0; i < 100; ++i) {
      TokenList title(rng.below(10));
      for (auto& t : title) {
        const auto r = rng.below(14);
        t = r < 12 ? "w" + std::to_string(r) : "x";
      }
      const std::string attr = "a" + std::to_string(rng.below(5));
      CHECK(dictionary_extract(title, attr, kb) == oracle::max_count_match(title, attr, kb));
    }
  }
}
