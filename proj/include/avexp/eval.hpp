#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "avexp/knowledge.hpp"
#include "avexp/spanlabel.hpp"

namespace avexp {

/// A predicted value for one example; empty optional is NULL.
struct Prediction {
  std::size_t example_id = 0;
  std::optional<TokenList> value;
};

/// Confusion counts for exact-match extraction.
struct Counts {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;  // precision denominator
  std::size_t gold = 0;       // non-NULL golds
  std::size_t examples = 0;

  Counts& operator+=(const Counts& o);
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// P = TP / predicted, R = TP / gold, F1 their harmonic mean; each is 0
/// when its denominator (or TP) is 0.
Prf prf(const Counts& c);

struct ScoreOptions {
  /// Also count NULL predictions on non-NULL golds in the precision
  /// denominator.
  bool strict = false;
};

struct AttributeScore {
  Counts counts;
  Prf prf;
};

/// Micro and macro scores over a set of examples. Macro averages the
/// per-attribute P, R and F1 over attributes with at least one non-NULL gold.
struct Score {
  Counts counts;
  Prf micro;
  Prf macro;
  std::size_t macro_attributes = 0;
  std::size_t excluded_null_only = 0;
  std::map<std::string, AttributeScore> per_attribute;
};

/// A prediction is correct iff the gold is non-NULL and the predicted token
/// sequence equals it. A NULL prediction on a NULL gold counts nowhere.
/// Throws DataError on a missing, duplicate or unknown prediction id.
Score score(const std::vector<Example>& golds,
            const std::vector<Prediction>& predictions,
            const ScoreOptions& options = {});

/// Per-example contribution to the counts.
Counts example_counts(const std::optional<TokenList>& gold,
                      const std::optional<TokenList>& predicted,
                      const ScoreOptions& options = {});

enum class ValueCategory { kSeenAttrSeenValue, kSeenAttrUnseenValue, kUnseenAttr };

const char* to_string(ValueCategory c);

/// Seen attribute = present in the training KB (even with no values). A NULL
/// gold on a seen attribute goes to the seen-value category.
ValueCategory categorize_example(const Example& example, const KnowledgeBase& train_kb);

/// Maps a token sequence to a fixed-size vector.
using Embedder = std::function<std::vector<double>(const TokenList&)>;

/// Signed feature hashing of character trigrams of "<token>" into `dim`
/// buckets.
class HashedNgramEmbedder {
 public:
  explicit HashedNgramEmbedder(std::size_t dim = 128, std::size_t n = 3)
      : dim_(dim), n_(n) {}
  std::vector<double> operator()(const TokenList& tokens) const;

 private:
  std::size_t dim_;
  std::size_t n_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Cosine between the attribute embedding and the mean embedding of its KB
/// values; nullopt when the attribute has no values.
std::optional<double> ambiguity_score(const std::string& attribute,
                                      const KnowledgeBase& kb,
                                      const Embedder& embedder);

struct AttributeProfile {
  std::string attribute;
  std::size_t train_count = 0;
  double ambiguity = 0.0;
  bool high_frequency = false;
  bool high_similarity = false;

  std::string bucket() const;
};

struct Medians {
  double train_count = 0.0;
  double ambiguity = 0.0;
};

double median(std::vector<double> values);

/// Splits at the medians of the given profiles: a value below its median is
/// "lo", otherwise "hi".
Medians bucketize(std::vector<AttributeProfile>& profiles);

/// Profiles for the attributes that have KB values. train_count counts all
/// training tuples of the attribute, NULL included.
std::vector<AttributeProfile> profile_attributes(
    const std::set<std::string>& attributes, const KnowledgeBase& kb,
    const std::vector<CleanTuple>& train, const Embedder& embedder);

/// Overall score plus the stratified breakdowns.
struct EvalReport {
  Score overall;
  std::map<std::string, Score> buckets;     // by AttributeProfile::bucket()
  std::map<std::string, Score> categories;  // by ValueCategory
  std::map<std::string, std::size_t> category_sizes;
  std::size_t null_gold_seen_value = 0;  // NULL golds filed as seen-value
  Medians medians;
};

/// Scores overall, per value category and per frequency x similarity
/// bucket. Only examples whose attribute has a profile enter the buckets.
EvalReport evaluate(const std::vector<Example>& golds,
                    const std::vector<Prediction>& predictions,
                    const KnowledgeBase& train_kb,
                    const std::vector<AttributeProfile>& profiles,
                    const ScoreOptions& options = {});

/// Restricts a gold set (and matching predictions) to the given attributes.
std::vector<Example> restrict_examples(const std::vector<Example>& examples,
                                       const std::set<std::string>& attributes);
std::vector<Prediction> restrict_predictions(
    const std::vector<Prediction>& predictions,
    const std::vector<Example>& kept);

/// Attributes whose value lists differ between the two KBs.
std::set<std::string> changed_attributes(const KnowledgeBase& a,
                                         const KnowledgeBase& b);

struct CategoryDelta {
  Prf micro;
  Prf macro;
  std::size_t examples = 0;
};

/// merged - base, per value category present in either report.
std::map<std::string, CategoryDelta> compare_kb(const EvalReport& base,
                                                const EvalReport& merged);

std::string report_to_json(const EvalReport& report);
std::string score_to_json(const Score& score);
std::string delta_to_json(const std::map<std::string, CategoryDelta>& deltas);

/// Aligned text tables: overall, categories, buckets.
void print_report(std::ostream& out, const EvalReport& report);
void print_delta(std::ostream& out, const std::map<std::string, CategoryDelta>& deltas);

/// attribute,train_count,ambiguity,bucket
void write_profiles_csv(std::ostream& out, const std::vector<AttributeProfile>& profiles);

}  // namespace avexp
