#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "avexp/common.hpp"
#include "avexp/corpus.hpp"

namespace avexp {

inline constexpr std::size_t kDefaultMaxTitleTokens = 64;

/// Inclusive token positions. Position 0 is the CLS slot and title tokens
/// occupy 1..n, so (0, 0) encodes NULL.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool is_null() const { return begin == 0 && end == 0; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// A tokenized tuple. The title is already truncated; `value` is the gold
/// value tokens, empty optional for NULL.
struct Example {
  std::size_t id = 0;
  std::string attribute;
  TokenList title_tokens;
  TokenList attribute_tokens;
  std::optional<TokenList> value;
};

/// An example whose gold value was located in the title.
struct LabeledExample : Example {
  Span gold;
  bool is_null = false;
};

/// Earliest window of `title` equal to `value`, 1-indexed. Throws DataError
/// on an empty value.
std::optional<Span> find_span(const TokenList& title, const TokenList& value);

enum class DropReason { kNoMatch, kMatchTruncated };

const char* to_string(DropReason reason);

/// Tokenizes a tuple and truncates the title to `max_title` tokens.
Example to_example(const CleanTuple& tuple, std::size_t id,
                   std::size_t max_title = kDefaultMaxTitleTokens);

struct LabelOutcome {
  std::optional<LabeledExample> labeled;
  std::optional<DropReason> dropped;
};

/// NULL -> (0, 0); otherwise the first match in the truncated title, or a
/// drop with the reason.
LabelOutcome to_labeled(const CleanTuple& tuple, std::size_t id,
                        std::size_t max_title = kDefaultMaxTitleTokens);

struct DropReport {
  std::size_t input = 0;
  std::size_t emitted = 0;
  std::size_t null_labels = 0;
  std::size_t no_match = 0;
  std::size_t match_truncated = 0;

  std::size_t dropped() const { return no_match + match_truncated; }
};

struct Conversion {
  std::vector<LabeledExample> labeled;
  std::vector<Example> examples;  // every tuple, for evaluation
  DropReport report;
};

/// Ids are assigned by input position starting at `first_id`.
Conversion convert(const std::vector<CleanTuple>& tuples,
                   std::size_t max_title = kDefaultMaxTitleTokens,
                   std::size_t first_id = 0);

void write_labeled_jsonl(std::ostream& out,
                         const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_labeled_jsonl(std::istream& in);
std::string drop_report_json(const DropReport& report);

}  // namespace avexp
