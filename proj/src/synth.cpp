#include "avexp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace avexp {

namespace {

// Disjoint consonant sets keep values, ambiguous names and filler words from
// sharing any character trigram.
constexpr std::string_view kValueConsonants = "bdgklm";
constexpr std::string_view kNameConsonants = "nprstvz";
constexpr std::string_view kFillerConsonants = "cfhjqwxy";
constexpr std::string_view kVowels = "aeiou";

std::string syllable(Rng& rng, std::string_view consonants) {
  std::string s;
  s += consonants[rng.below(consonants.size())];
  s += kVowels[rng.below(kVowels.size())];
  return s;
}

std::string word(Rng& rng, std::string_view consonants, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) w += syllable(rng, consonants);
  return w;
}

// Draws words until one is new.
std::string fresh_word(Rng& rng, std::string_view consonants, std::size_t syllables,
                       std::set<std::string>& used) {
  for (;;) {
    std::string w = word(rng, consonants, syllables);
    if (used.insert(w).second) return w;
    if (used.size() > 100000) ++syllables;
  }
}

}  // namespace

void SynthSpec::validate() const {
  auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!fraction(ambiguous_fraction) || !fraction(null_fraction) ||
      !fraction(multiword_fraction)) {
    throw UsageError("synth fractions must lie in [0, 1]");
  }
  if (tuples < 1 || attributes < 1 || value_vocab < 1 || filler_vocab < 1) {
    throw UsageError("synth counts must be at least 1");
  }
  if (min_title_fillers > max_title_fillers) {
    throw UsageError("min title fillers exceeds max");
  }
  if (skew < 0.0 || value_skew < 0.0) throw UsageError("skew must be non-negative");
}

ZipfSampler::ZipfSampler(std::size_t n, double skew) {
  cdf_.resize(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += 1.0 / std::pow(static_cast<double>(k + 1), skew);
    cdf_[k] = total;
  }
  for (auto& c : cdf_) c /= total;
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

double ZipfSampler::probability(std::size_t rank) const {
  return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

SynthCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n_types =
      spec.value_types ? spec.value_types : std::max<std::size_t>(1, spec.attributes / 5);
  const std::size_t pool_size = std::max<std::size_t>(2, spec.value_vocab / n_types);

  std::set<std::string> used;
  // Value pools: every value of a type starts with the type's stem.
  std::vector<std::string> stems;
  std::vector<std::vector<std::string>> pools(n_types);
  std::vector<std::string> modifiers;
  for (std::size_t i = 0; i < 12; ++i) {
    modifiers.push_back(fresh_word(rng, kValueConsonants, 3, used));
  }
  for (std::size_t t = 0; t < n_types; ++t) {
    stems.push_back(fresh_word(rng, kValueConsonants, 2, used));
  }
  for (std::size_t t = 0; t < n_types; ++t) {
    std::set<std::string> pool_used;
    while (pools[t].size() < pool_size) {
      std::string v = stems[t] + word(rng, kValueConsonants, 1 + rng.below(2));
      if (!pool_used.insert(v).second || used.count(v)) continue;
      if (rng.bernoulli(spec.multiword_fraction)) {
        v = modifiers[rng.below(modifiers.size())] + " " + v;
        if (!pool_used.insert(v).second) continue;
      }
      pools[t].push_back(v);
    }
  }

  std::vector<std::string> ambiguous_words;
  std::set<std::string> name_used;
  for (std::size_t i = 0; i < 16; ++i) {
    ambiguous_words.push_back(fresh_word(rng, kNameConsonants, 2, name_used));
  }
  std::vector<std::string> fillers;
  std::set<std::string> filler_used;
  while (fillers.size() < spec.filler_vocab) {
    fillers.push_back(fresh_word(rng, kFillerConsonants, 2 + rng.below(2), filler_used));
  }

  SynthCorpus corpus;
  std::set<std::string> names;
  for (std::size_t a = 0; a < spec.attributes; ++a) {
    SynthAttribute attr;
    attr.type = rng.below(n_types);
    attr.ambiguous = rng.bernoulli(spec.ambiguous_fraction);
    for (;;) {
      if (attr.ambiguous) {
        attr.name = ambiguous_words[rng.below(ambiguous_words.size())] + " " +
                    ambiguous_words[rng.below(ambiguous_words.size())];
        if (rng.bernoulli(0.5)) attr.name += " " + std::to_string(1 + rng.below(9));
      } else {
        attr.name = stems[attr.type] + word(rng, kNameConsonants, 1);
      }
      if (names.insert(attr.name).second) break;
    }
    const auto& pool = pools[attr.type];
    const std::size_t lo = std::min<std::size_t>(3, pool.size());
    const std::size_t hi = std::min<std::size_t>(30, pool.size());
    const std::size_t k = lo + rng.below(hi - lo + 1);
    std::vector<std::string> shuffled = pool;
    rng.shuffle(shuffled);
    attr.values.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(k));
    corpus.attributes.push_back(std::move(attr));
  }

  const ZipfSampler attr_sampler(spec.attributes, spec.skew);
  std::vector<ZipfSampler> value_samplers;
  for (const auto& a : corpus.attributes) {
    value_samplers.emplace_back(a.values.size(), spec.value_skew);
  }

  corpus.tuples.reserve(spec.tuples);
  for (std::size_t i = 0; i < spec.tuples; ++i) {
    const std::size_t a = attr_sampler(rng);
    const auto& attr = corpus.attributes[a];
    const bool is_null = rng.bernoulli(spec.null_fraction);

    const std::size_t n_fill = spec.min_title_fillers +
                               rng.below(spec.max_title_fillers - spec.min_title_fillers + 1);
    std::vector<std::string> parts;
    for (std::size_t f = 0; f < n_fill; ++f) parts.push_back(fillers[rng.below(fillers.size())]);
    const std::size_t n_distract = rng.below(spec.max_distractors + 1);
    for (std::size_t d = 0; d < n_distract && n_types > 1; ++d) {
      std::size_t other = rng.below(n_types - 1);
      if (other >= attr.type) ++other;
      const auto& pool = pools[other];
      parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(rng.below(parts.size() + 1)),
                   pool[rng.below(pool.size())]);
    }
    RawTuple t;
    if (is_null) {
      t.value = std::string(kRawNullLiteral);
    } else {
      t.value = attr.values[value_samplers[a](rng)];
      parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(rng.below(parts.size() + 1)),
                   t.value);
    }
    t.title = join(parts, " ");
    t.attribute = attr.name;
    corpus.tuples.push_back(std::move(t));
  }
  return corpus;
}

void write_raw_tsv(std::ostream& out, const std::vector<RawTuple>& tuples) {
  for (const auto& t : tuples) {
    out << t.title << '\t' << t.attribute << '\t' << t.value << '\n';
  }
}

}  // namespace avexp
