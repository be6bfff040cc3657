#include <doctest.h>

#include <cmath>
#include <sstream>

#include "avexp/eval.hpp"
#include "avexp/knowledge.hpp"
#include "metric_fixture.hpp"

using namespace avexp;

namespace {
Example make(std::size_t id, const std::string& attr, std::optional<TokenList> v) {
  Example ex;
  ex.id = id;
  ex.attribute = attr;
  ex.attribute_tokens = {attr};
  ex.title_tokens = {"x"};
  ex.value = std::move(v);
  return ex;
}
}  // namespace

TEST_CASE("score on the worked fixture") {
  std::vector<Example> golds;
  std::vector<Prediction> preds;
  fixture::metric_fixture(golds, preds);
  const auto& e = fixture::kExpected;
  const Score s = score(golds, preds);
  CHECK(s.micro.precision == doctest::Approx(e.micro_p));
  CHECK(s.micro.recall == doctest::Approx(e.micro_r));
  CHECK(s.micro.f1 == doctest::Approx(e.micro_f1));
  CHECK(s.macro.precision == doctest::Approx(e.macro_p));
  CHECK(s.macro.recall == doctest::Approx(e.macro_r));
  CHECK(s.macro.f1 == doctest::Approx(e.macro_f1));
  CHECK(s.macro_attributes == e.macro_attributes);
  CHECK(s.excluded_null_only == e.excluded);
  const Score strict = score(golds, preds, {true});
  CHECK(strict.micro.precision == doctest::Approx(e.strict_micro_p));
  CHECK(strict.micro.f1 == doctest::Approx(e.strict_micro_f1));
}

TEST_CASE("two golds, one found") {
  const std::vector<Example> golds = {make(0, "c", TokenList{"red"}), make(1, "c", TokenList{"blue"})};
  const std::vector<Prediction> preds = {{0, TokenList{"red"}}, {1, std::nullopt}};
  const Score s = score(golds, preds);
  CHECK(s.micro.precision == doctest::Approx(1.0));
  CHECK(s.micro.recall == doctest::Approx(0.5));
  CHECK(s.micro.f1 == doctest::Approx(2.0 / 3));
}

TEST_CASE("score rejects malformed prediction sets") {
  const std::vector<Example> golds = {make(0, "c", TokenList{"red"}), make(1, "c", std::nullopt)};
  CHECK_THROWS_AS(score(golds, {{0, std::nullopt}}), DataError);
  CHECK_THROWS_AS(score(golds, {{0, std::nullopt}, {0, std::nullopt}}), DataError);
  CHECK_THROWS_AS(score(golds, {{0, std::nullopt}, {1, std::nullopt}, {2, std::nullopt}}),
                  DataError);
}

TEST_CASE("score properties on random data") {
  Rng rng(12);
  const std::vector<TokenList> vocab = {{"a"}, {"b"}, {"a", "b"}, {"c"}};
  for (int round = 0; round < 50; ++round) {
    std::vector<Example> golds;
    std::vector<Prediction> preds;
    for (std::size_t i = 0; i < 60; ++i) {
      auto pick = [&]() -> std::optional<TokenList> {
        if (rng.bernoulli(0.3)) return std::nullopt;
        return vocab[rng.below(vocab.size())];
      };
      golds.push_back(make(i, "attr" + std::to_string(rng.below(6)), pick()));
      preds.push_back({i, pick()});
    }
    const Score s = score(golds, preds);
    for (const Prf* p : {&s.micro, &s.macro}) {
      CHECK(p->precision >= 0);
      CHECK(p->precision <= 1);
      CHECK(p->recall >= 0);
      CHECK(p->recall <= 1);
      CHECK(p->f1 >= 0);
      CHECK(p->f1 <= 1);
    }
    // harmonic mean recomputed independently
    const double tp = static_cast<double>(s.counts.true_positives);
    const double pr = s.counts.predicted ? tp / static_cast<double>(s.counts.predicted) : 0;
    const double rc = s.counts.gold ? tp / static_cast<double>(s.counts.gold) : 0;
    CHECK(s.micro.f1 == doctest::Approx(tp == 0 ? 0.0 : 2 * pr * rc / (pr + rc)));
    // per-attribute counts add up to the micro counts
    Counts sum;
    for (const auto& [attr, a] : s.per_attribute) sum += a.counts;
    CHECK(sum.true_positives == s.counts.true_positives);
    CHECK(sum.predicted == s.counts.predicted);
    CHECK(sum.gold == s.counts.gold);
    // prediction order does not matter
    auto shuffled = preds;
    rng.shuffle(shuffled);
    const Score t = score(golds, shuffled);
    CHECK(t.micro.f1 == s.micro.f1);
    CHECK(t.macro.f1 == s.macro.f1);
  }
}

TEST_CASE("categorize_example") {
  const auto kb = build_kb({{"t", "color", "red"}, {"t", "size", std::nullopt}});
  CHECK(categorize_example(make(0, "color", TokenList{"red"}), kb) ==
        ValueCategory::kSeenAttrSeenValue);
  CHECK(categorize_example(make(0, "color", TokenList{"blue"}), kb) ==
        ValueCategory::kSeenAttrUnseenValue);
  CHECK(categorize_example(make(0, "color", std::nullopt), kb) ==
        ValueCategory::kSeenAttrSeenValue);
  CHECK(categorize_example(make(0, "size", TokenList{"xl"}), kb) ==
        ValueCategory::kSeenAttrUnseenValue);
  CHECK(categorize_example(make(0, "brand", TokenList{"nike"}), kb) == ValueCategory::kUnseenAttr);
}

TEST_CASE("categories partition the test set") {
  Rng rng(13);
  std::vector<CleanTuple> train;
  for (int i = 0; i < 300; ++i) {
    train.push_back({"t", "a" + std::to_string(rng.below(8)),
                     rng.bernoulli(0.2) ? std::nullopt
                                        : std::optional<std::string>("v" + std::to_string(rng.below(10)))});
  }
  const auto kb = build_kb(train);
  std::vector<Example> golds;
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < 200; ++i) {
    golds.push_back(make(i, "a" + std::to_string(rng.below(12)),
                         rng.bernoulli(0.2) ? std::nullopt
                                            : std::optional<TokenList>(TokenList{"v" + std::to_string(rng.below(14))})));
    preds.push_back({i, golds.back().value});
  }
  const auto report = evaluate(golds, preds, kb, {});
  std::size_t total = 0;
  for (const auto& [name, n] : report.category_sizes) total += n;
  CHECK(total == golds.size());
  std::size_t from_scores = 0;
  for (const auto& [name, s] : report.categories) from_scores += s.counts.examples;
  CHECK(from_scores == golds.size());
}

TEST_CASE("ambiguity score and hashed embedder") {
  const HashedNgramEmbedder emb;
  const auto kb = build_kb({{"t", "red", "red"}, {"t", "shade", "blue"}});
  CHECK(*ambiguity_score("red", kb, emb) == doctest::Approx(1.0));
  CHECK(cosine({1, 0}, {0, 1}) == 0.0);
  CHECK(cosine({0, 0}, {1, 1}) == 0.0);
  const auto none = build_kb({{"t", "size", std::nullopt}});
  CHECK_FALSE(ambiguity_score("size", none, emb));
  CHECK(emb({"abc"}) == emb({"abc"}));
  CHECK(emb({"abc"}).size() == 128);
}

TEST_CASE("medians and buckets") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  std::vector<AttributeProfile> one = {{"a", 5, 0.3}};
  bucketize(one);
  CHECK(one[0].bucket() == "hi-freq/hi-sim");
  std::vector<AttributeProfile> same = {{"a", 4, 0.1}, {"b", 4, 0.5}, {"c", 4, 0.9}};
  bucketize(same);
  for (const auto& p : same) CHECK(p.high_frequency);
  CHECK(same[0].bucket() == "hi-freq/lo-sim");
  CHECK(same[2].bucket() == "hi-freq/hi-sim");
}

TEST_CASE("profile_attributes counts every training tuple") {
  const std::vector<CleanTuple> train = {
      {"t", "color", "red"}, {"t", "color", std::nullopt}, {"t", "size", std::nullopt}};
  const auto kb = build_kb(train);
  const auto profiles = profile_attributes({"color", "size", "brand"}, kb, train, HashedNgramEmbedder());
  REQUIRE(profiles.size() == 1);
  CHECK(profiles[0].attribute == "color");
  CHECK(profiles[0].train_count == 2);
}

TEST_CASE("compare_kb on identical reports is zero") {
  std::vector<Example> golds;
  std::vector<Prediction> preds;
  fixture::metric_fixture(golds, preds);
  const auto kb = build_kb({{"t", "color", "red"}});
  const auto r = evaluate(golds, preds, kb, {});
  for (const auto& [cat, d] : compare_kb(r, r)) {
    CHECK(d.micro.f1 == 0.0);
    CHECK(d.micro.recall == 0.0);
    CHECK(d.macro.f1 == 0.0);
  }
  CHECK(changed_attributes(kb, kb).empty());
  CHECK(changed_attributes(kb, merge(kb, {{"t", "color", "blue"}})) ==
        std::set<std::string>{"color"});
}

TEST_CASE("report JSON and text render") {
  std::vector<Example> golds;
  std::vector<Prediction> preds;
  fixture::metric_fixture(golds, preds);
  const auto r = evaluate(golds, preds, KnowledgeBase{}, {});
  CHECK(report_to_json(r).find("\"overall\"") != std::string::npos);
  std::ostringstream out;
  print_report(out, r);
  CHECK(out.str().find("micro") != std::string::npos);
}
