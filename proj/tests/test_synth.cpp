#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "avexp/spanlabel.hpp"
#include "avexp/synth.hpp"
#include "avexp/tokenize.hpp"

using namespace avexp;

namespace {
std::set<std::string> trigrams(const std::string& text) {
  std::set<std::string> out;
  for (const auto& tok : tokenize(text)) {
    const std::string padded = "<" + tok + ">";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.insert(padded.substr(i, 3));
  }
  return out;
}
}  // namespace

TEST_CASE("synthetic values always appear in their titles") {
  SynthSpec spec;
  spec.tuples = 3000;
  const auto corpus = generate_synthetic(spec);
  std::vector<CleanTuple> clean;
  for (const auto& t : corpus.tuples) clean.push_back(*clean_tuple(t));
  const auto conv = convert(clean);
  CHECK(conv.report.dropped() == 0);
  CHECK(conv.report.input == 3000);
}

TEST_CASE("null fraction zero yields no NULL tuples") {
  SynthSpec spec;
  spec.tuples = 2000;
  spec.null_fraction = 0.0;
  for (const auto& t : generate_synthetic(spec).tuples) CHECK(t.value != kRawNullLiteral);
}

TEST_CASE("attribute frequencies are heavy tailed") {
  SynthSpec spec;
  spec.tuples = 20000;
  spec.attributes = 200;
  spec.skew = 1.1;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : generate_synthetic(spec).tuples) ++counts[t.attribute];
  std::vector<std::size_t> c;
  for (const auto& [a, n] : counts) c.push_back(n);
  std::sort(c.begin(), c.end());
  const double med = c.size() % 2 ? static_cast<double>(c[c.size() / 2])
                                  : (c[c.size() / 2 - 1] + c[c.size() / 2]) / 2.0;
  CHECK(static_cast<double>(c.back()) >= 10 * med);
}

TEST_CASE("ambiguous names share no token or trigram with their values") {
  SynthSpec spec;
  spec.tuples = 100;
  const auto corpus = generate_synthetic(spec);
  std::size_t ambiguous = 0;
  for (const auto& a : corpus.attributes) {
    if (!a.ambiguous) continue;
    ++ambiguous;
    const auto name = trigrams(a.name);
    const auto name_tokens = tokenize(a.name);
    for (const auto& v : a.values) {
      for (const auto& g : trigrams(v)) CHECK(name.count(g) == 0);
      for (const auto& t : tokenize(v)) {
        CHECK(std::find(name_tokens.begin(), name_tokens.end(), t) == name_tokens.end());
      }
    }
  }
  const double frac = static_cast<double>(ambiguous) / static_cast<double>(corpus.attributes.size());
  CHECK(frac > 0.3);
  CHECK(frac < 0.5);
}

TEST_CASE("generator is deterministic and validates its spec") {
  SynthSpec spec;
  spec.tuples = 500;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.tuples.size() == b.tuples.size());
  for (std::size_t i = 0; i < a.tuples.size(); ++i) CHECK(a.tuples[i].title == b.tuples[i].title);
  spec.null_fraction = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec), UsageError);
  spec.null_fraction = 0.1;
  spec.attributes = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), UsageError);
}

TEST_CASE("zipf sampler probabilities") {
  const ZipfSampler z(4, 1.0);
  const double h = 1 + 1 / 2.0 + 1 / 3.0 + 1 / 4.0;
  CHECK(z.probability(0) == doctest::Approx(1 / h));
  CHECK(z.probability(3) == doctest::Approx(0.25 / h));
}
