#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "avexp/common.hpp"
#include "avexp/corpus.hpp"

namespace avexp {

/// A value seen for an attribute. `surface` is the space-joined token form
/// and identifies the value.
struct KnownValue {
  TokenList tokens;
  std::string surface;
  std::size_t count = 0;

  friend bool operator==(const KnownValue&, const KnownValue&) = default;
};

/// Attribute -> values seen in the source tuples, ordered by count
/// descending and surface ascending on ties. NULL never appears as a value;
/// an attribute seen only with NULL has an empty list.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::string source) : source_(std::move(source)) {}

  /// nullptr when the attribute was never seen.
  const std::vector<KnownValue>* find(const std::string& attribute) const;

  /// True when the attribute has at least one value.
  bool has_values(const std::string& attribute) const;

  const std::map<std::string, std::vector<KnownValue>>& entries() const {
    return entries_;
  }
  const std::string& source() const { return source_; }
  std::size_t pair_count() const;

  void add(const CleanTuple& tuple);
  void set_source(std::string source) { source_ = std::move(source); }

  /// Re-establishes the ordering invariant after add().
  void sort();

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

  // JSONL: a `{"source": ...}` header line, then one
  // `{"attribute": ..., "values": [{"surface": ..., "count": ...}]}` per
  // attribute in key order.
  void write(std::ostream& out) const;
  static KnowledgeBase read(std::istream& in);
  void save(const std::string& path) const;
  static KnowledgeBase load(const std::string& path);

 private:
  std::map<std::string, std::vector<KnownValue>> entries_;
  std::string source_ = "train";
};

KnowledgeBase build_kb(const std::vector<CleanTuple>& train);

/// Adds the counts of `extra` to a copy of `kb` and tags the source
/// "<source>+<extra_tag>".
KnowledgeBase merge(const KnowledgeBase& kb, const std::vector<CleanTuple>& extra,
                    const std::string& extra_tag = "dev");

inline constexpr double kDefaultDropoutRate = 0.2;

struct DropoutConfig {
  double rate = kDefaultDropoutRate;
  std::uint64_t seed = 0;
};

/// A knowledge value after dropout. Dropped values keep their token length
/// but every token is the PAD surface.
struct QueryValue {
  TokenList tokens;
  bool dropped = false;
};

/// Probability rate^count that a value seen `count` times is dropped.
double drop_probability(double rate, std::size_t count);

/// Independently replaces each value by PAD tokens with probability
/// rate^count. Order and token lengths are preserved.
std::vector<QueryValue> apply_dropout(const std::vector<KnownValue>& values,
                                      double rate, Rng& rng);
std::vector<QueryValue> apply_dropout(const std::vector<KnownValue>& values,
                                      const DropoutConfig& config);

/// The values as-is, for evaluation.
std::vector<QueryValue> without_dropout(const std::vector<KnownValue>& values);

}  // namespace avexp
