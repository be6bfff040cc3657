#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avexp/corpus.hpp"
#include "avexp/eval.hpp"
#include "avexp/knowledge.hpp"
#include "avexp/model.hpp"
#include "avexp/querybuild.hpp"
#include "avexp/spanlabel.hpp"
#include "avexp/tokenize.hpp"

namespace avexp {

inline constexpr const char* kVersion = "0.3.0";

/// A system under evaluation: the dictionary matcher or a pointer-model
/// variant.
struct SystemSpec {
  bool dictionary = false;
  TrainingVariant variant;

  std::string name() const { return dictionary ? "dictionary" : variant.name(); }
};

/// Parses "dictionary", "plain", "vals", "vals+drop", "vals+mixing",
/// "vals+drop+mixing" (flags in any order). Throws UsageError otherwise,
/// including for +drop or +mixing without +vals.
SystemSpec parse_system(const std::string& text, double dropout_rate = kDefaultDropoutRate);

struct ExperimentConfig {
  std::string input;     // raw or cleaned corpus
  std::string work_dir;  // per-trial subdirectories go here
  std::uint64_t seed = 1;  // split seed; trial t trains with derive_seed(seed, t)
  std::vector<std::string> systems = {"dictionary", "plain", "vals",
                                      "vals+drop+mixing"};
  double dropout_rate = kDefaultDropoutRate;
  QueryBudget budget;
  std::size_t trials = 5;
  TrainConfig train;
  std::size_t min_count = 1;
  bool stratified = false;
  bool strict = false;
  bool select_on_dev = true;
  bool resume = false;

  void validate() const;
};

/// Everything derived from a split that does not depend on the model.
struct PreparedData {
  SplitDataset split;
  Vocabulary vocab;
  KnowledgeBase kb;
  Conversion train;
  Conversion dev;
  Conversion test;
  std::vector<AttributeProfile> profiles;
};

/// Vocabulary over training titles, attributes and values; KB from the
/// training split; labels for all three splits; attribute profiles for the
/// test attributes that have KB values.
PreparedData prepare(const SplitDataset& split, std::size_t min_count = 1,
                     std::size_t max_title = kDefaultMaxTitleTokens);

/// The value between the predicted positions, nullopt for (0, 0).
std::optional<TokenList> span_value(const Example& example, const Span& span);

std::vector<Prediction> predict_all(const SpanExtractor& model,
                                    const std::vector<Example>& examples,
                                    const KnowledgeBase& kb,
                                    const TrainingVariant& variant,
                                    const Vocabulary& vocab,
                                    const QueryBudget& budget = {});

std::vector<Prediction> dictionary_predict(const std::vector<Example>& examples,
                                           const KnowledgeBase& kb);

struct SystemResult {
  std::string system;
  std::vector<Prediction> predictions;
  EvalReport report;
  std::optional<TrainResult> training;
};

/// Trains (when needed) and evaluates one system on the test split.
SystemResult run_system(const PreparedData& data, const SystemSpec& system,
                        std::uint64_t model_seed, const ExperimentConfig& config);

// Predictions as JSONL: {"id": N, "value": "space joined tokens" | null}.
void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(std::istream& in);

std::string stats_json(const CorpusStats& s);

/// Mean and sample standard deviation.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

/// Runs every configured system for every trial, writing reports under
/// work_dir/trial-<t>/<system>/ and a summary at work_dir/summary.{json,txt}.
/// Returns results indexed [trial][system].
std::vector<std::vector<SystemResult>> run_experiment(const ExperimentConfig& config);

/// Loads raw (TSV/\x01/JSONL with "NULL") or cleaned JSONL (null values)
/// input; raw input is cleaned first.
std::vector<CleanTuple> load_corpus(const std::string& path);

/// FNV-1a of a file's bytes, hex encoded.
std::string file_hash(const std::string& path);

}  // namespace avexp
