#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "avexp/knowledge.hpp"
#include "avexp/spanlabel.hpp"
#include "avexp/tokenize.hpp"

namespace avexp {

enum class Role : std::uint8_t { kSpecial, kTitle, kAttr, kValue };

/// Which knowledge token, if any, precedes the attribute.
enum class KnowledgeFlag : std::uint8_t { kNone, kSeen, kUnseen };

enum class QueryMode : std::uint8_t {
  kPlain,         // [CLS; x; SEP; a; SEP]
  kVals,          // [CLS; x; SEP; a; SEP; v_a]
  kMixingSeen,    // [CLS; x; SEP; SEEN; a; SEP; v_a]
  kMixingUnseen,  // [CLS; x; SEP; UNSEEN; a; SEP]
};

/// Length limits. The query is everything after the SEP that closes the
/// title: knowledge token, attribute, SEP and the value string.
struct QueryBudget {
  std::size_t max_title = 64;
  std::size_t plain_query = 32;
  std::size_t expanded_query = 192;

  std::size_t query_limit(QueryMode mode) const {
    return mode == QueryMode::kPlain ? plain_query : expanded_query;
  }
};

/// A model input. The title always starts at position 1, right after CLS,
/// so gold positions index the title identically in every mode.
struct EncodedInput {
  std::vector<TokenId> ids;
  std::vector<Role> roles;
  KnowledgeFlag knowledge = KnowledgeFlag::kNone;
  std::size_t title_offset = 1;
  std::size_t title_length = 0;
  std::size_t example_id = 0;
  Span gold;
  bool attribute_truncated = false;

  std::size_t size() const { return ids.size(); }
  std::size_t count_role(Role role) const;
};

/// The knowledge-related switches of a model variant.
struct TrainingVariant {
  bool vals = false;
  bool drop = false;
  bool mixing = false;
  double dropout_rate = kDefaultDropoutRate;

  /// Throws UsageError when drop or mixing is set without vals.
  void validate() const;
  std::string name() const;
};

/// Assembles one input. Values are appended in the given order, separated by
/// SEP, and the value string is cut at the query budget even mid-value.
/// Plain and unseen modes ignore `values`.
EncodedInput build_input(const Example& example,
                         std::span<const QueryValue> values, QueryMode mode,
                         const Vocabulary& vocab,
                         const QueryBudget& budget = {});

/// As above, carrying the gold span along for training.
EncodedInput build_input(const LabeledExample& example,
                         std::span<const QueryValue> values, QueryMode mode,
                         const Vocabulary& vocab,
                         const QueryBudget& budget = {});

/// Evaluation input for a variant: no dropout; with mixing, SEEN plus values
/// when the attribute has values in `kb`, UNSEEN otherwise.
EncodedInput build_eval_input(const Example& example, const KnowledgeBase& kb,
                              const TrainingVariant& variant,
                              const Vocabulary& vocab,
                              const QueryBudget& budget = {});

/// Training inputs for a group of examples. With mixing every example yields
/// a SEEN input with dropout-applied values followed by its UNSEEN twin;
/// otherwise one input per example. Dropout draws come from `rng`.
std::vector<EncodedInput> make_mixed_batch(
    std::span<const LabeledExample> examples, const KnowledgeBase& kb,
    const TrainingVariant& variant, const Vocabulary& vocab, Rng& rng,
    const QueryBudget& budget = {});

/// One epoch of training batches. `batch_size` counts encoded inputs, so
/// with mixing each batch holds batch_size / 2 source examples. The example
/// order and every batch's dropout stream derive from (seed, epoch).
std::vector<std::vector<EncodedInput>> make_epoch_batches(
    const std::vector<LabeledExample>& examples, const KnowledgeBase& kb,
    const TrainingVariant& variant, const Vocabulary& vocab,
    std::size_t batch_size, std::uint64_t seed, std::size_t epoch,
    const QueryBudget& budget = {});

/// Human-readable dump, one `surface/ROLE` item per token.
void dump_input(std::ostream& out, const EncodedInput& input,
                const Vocabulary& vocab);

}  // namespace avexp
