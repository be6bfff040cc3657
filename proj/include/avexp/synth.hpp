#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "avexp/corpus.hpp"

namespace avexp {

/// Parameters of the synthetic corpus generator.
///
/// Attributes share value "types" (pools of pseudo-words with a common stem).
/// Unambiguous attribute names are built on their type's stem; ambiguous
/// names are drawn from a disjoint alphabet, so they share no character
/// trigram with their values. Attribute frequencies follow a Zipf law with
/// `skew`, and each attribute's values follow one with `value_skew`.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t tuples = 24000;
  std::size_t attributes = 200;
  std::size_t value_vocab = 2000;  // total values over all types
  std::size_t value_types = 0;     // 0: attributes / 5
  std::size_t min_title_fillers = 6;
  std::size_t max_title_fillers = 14;
  std::size_t max_distractors = 2;
  std::size_t filler_vocab = 600;
  double skew = 1.1;
  double value_skew = 1.0;
  double ambiguous_fraction = 0.4;
  double null_fraction = 0.15;
  double multiword_fraction = 0.15;

  void validate() const;
};

struct SynthAttribute {
  std::string name;
  std::size_t type = 0;
  bool ambiguous = false;
  std::vector<std::string> values;  // in frequency-rank order
};

struct SynthCorpus {
  std::vector<SynthAttribute> attributes;  // in frequency-rank order
  std::vector<RawTuple> tuples;
};

SynthCorpus generate_synthetic(const SynthSpec& spec);

/// title<TAB>attribute<TAB>value, "NULL" for absent values.
void write_raw_tsv(std::ostream& out, const std::vector<RawTuple>& tuples);

/// Inverse-CDF sampler over ranks 0..n-1 with P(k) proportional to
/// 1 / (k + 1)^skew.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double skew);
  std::size_t operator()(Rng& rng) const;
  double probability(std::size_t rank) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace avexp
