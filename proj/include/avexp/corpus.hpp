#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avexp/common.hpp"

namespace avexp {

/// One line of the raw dataset. `value` may be the literal "NULL".
struct RawTuple {
  std::string title;
  std::string attribute;
  std::string value;
};

/// A cleaned tuple. An empty optional value is the NULL sentinel: the title
/// carries no value for the attribute.
struct CleanTuple {
  std::string title;
  std::string attribute;
  std::optional<std::string> value;

  bool is_null() const { return !value.has_value(); }
  friend bool operator==(const CleanTuple&, const CleanTuple&) = default;
};

inline constexpr std::string_view kRawNullLiteral = "NULL";

/// Decodes HTML entities (named HTML5 references and numeric forms, repeated
/// until no decodable reference is left), collapses every whitespace run to a
/// single ASCII space and trims both ends. Unknown or malformed references
/// are kept verbatim.
std::string clean_text(std::string_view raw);

/// Decodes one layer of HTML character references.
std::string decode_html_entities(std::string_view text);

/// Lower-cases, separates letters from digits with a space and removes
/// trailing ':' characters. Expects clean_text output.
std::string normalize_attribute(std::string_view attr);

/// Counts of what cleaning touched. `changed_*` count tuples whose field
/// differs from its raw form.
struct CleanReport {
  std::size_t input = 0;
  std::size_t changed_titles = 0;
  std::size_t changed_attributes = 0;
  std::size_t changed_values = 0;
  std::size_t dropped_empty = 0;
  std::size_t duplicates = 0;
  std::size_t output = 0;

  std::size_t total_changes() const {
    return changed_titles + changed_attributes + changed_values +
           dropped_empty + duplicates;
  }
};

/// Cleans one tuple; nullopt when a field is empty after cleaning.
std::optional<CleanTuple> clean_tuple(const RawTuple& raw);

/// Removes exact (title, attribute, value) duplicates, keeping the first
/// occurrence and the original order otherwise.
std::vector<CleanTuple> dedup(const std::vector<CleanTuple>& tuples);

struct CleanResult {
  std::vector<CleanTuple> tuples;
  CleanReport report;
};

/// clean_tuple over every input followed by dedup.
CleanResult clean_corpus(const std::vector<RawTuple>& raw);

struct SplitDataset {
  std::vector<CleanTuple> train;
  std::vector<CleanTuple> dev;
  std::vector<CleanTuple> test;
  std::uint64_t seed = 0;
  bool stratified = false;
};

/// Seeded Fisher-Yates shuffle followed by a contiguous 7:1:2 partition
/// (dev = round(n/10), test = round(n/5), train takes the rest). With
/// `stratified`, the shuffled tuples are grouped by attribute and each one is
/// dealt to the part furthest behind its quota, giving the same sizes with
/// every attribute spread 7:1:2.
/// Throws DataError for fewer than 10 tuples.
SplitDataset split(const std::vector<CleanTuple>& tuples, std::uint64_t seed,
                   bool stratified = false);

/// The row layout of a dataset statistics table.
struct CorpusStats {
  std::size_t tuples = 0;
  std::size_t null_tuples = 0;
  std::size_t attribute_value_pairs = 0;
  std::size_t attributes = 0;
  std::size_t values = 0;
};

CorpusStats compute_stats(const std::vector<CleanTuple>& tuples);

// Raw input: JSONL objects with title/attribute/value, or one tuple per line
// separated by TAB or \x01. A TSV header line "title<TAB>attribute<TAB>value"
// is skipped.
std::vector<RawTuple> read_raw(std::istream& in);
std::vector<RawTuple> read_raw_file(const std::string& path);

void write_clean_jsonl(std::ostream& out, const std::vector<CleanTuple>& tuples);
std::vector<CleanTuple> read_clean_jsonl(std::istream& in);
void write_clean_file(const std::string& path,
                      const std::vector<CleanTuple>& tuples);
std::vector<CleanTuple> read_clean_file(const std::string& path);

}  // namespace avexp
