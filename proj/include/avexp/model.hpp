#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "avexp/querybuild.hpp"
#include "avexp/spanlabel.hpp"

namespace avexp {

/// Anything that maps an encoded input to a (begin, end) position pair with
/// 0 <= begin <= end <= title length; (0, 0) means NULL.
class SpanExtractor {
 public:
  virtual ~SpanExtractor() = default;
  virtual Span predict(const EncodedInput& input) const = 0;
};

/// Parameters of the bag-of-embeddings pointer scorer. Matrices are
/// row-major; the PAD row of the embedding table is never read.
struct PointerModelParams {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  std::vector<double> embedding;      // vocab_size x dim
  std::vector<double> query_weights;  // dim x dim
  std::vector<double> start_head;     // dim
  std::vector<double> end_head;       // dim

  PointerModelParams() = default;
  PointerModelParams(std::size_t vocab_size, std::size_t dim);

  /// Uniform in [-scale, scale] from `seed`.
  static PointerModelParams random(std::size_t vocab_size, std::size_t dim,
                                   std::uint64_t seed, double scale = 0.1);

  const double* embed(TokenId id) const { return &embedding[id * dim]; }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Flat view of the parameters in declaration order, for optimizers and
  /// finite-difference checks.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;

  friend bool operator==(const PointerModelParams&, const PointerModelParams&) = default;
};

struct Logits {
  std::vector<double> start;  // positions 0..n
  std::vector<double> end;
};

/// Scores every position of the title segment:
///   m = mean embedding of the non-PAD ATTR, VALUE and knowledge tokens
///   q = tanh(W m)
///   start[i] = q . (start_head * embed(x_i)), x_0 = CLS
///   end[i]   = q . (end_head * embed(x_i))
Logits forward(const EncodedInput& input, const PointerModelParams& params);

/// Cross-entropy of the start distribution at gold.begin plus that of the
/// end distribution at gold.end.
double loss(const Logits& logits, const Span& gold);

/// Mean of loss() over a batch.
double batch_loss(std::span<const EncodedInput> batch,
                  const PointerModelParams& params);

std::vector<double> softmax(std::span<const double> logits);

/// Joint argmax of start[b] + end[e] over (0, 0) and 1 <= b <= e <= n,
/// ties going to the smallest b, then the smallest e.
Span predict_span(const Logits& logits);

/// Gradient of batch_loss. The embedding part is sparse: only rows that
/// occur in the batch are present.
struct Gradient {
  std::unordered_map<TokenId, std::vector<double>> embedding;
  std::vector<double> query_weights;
  std::vector<double> start_head;
  std::vector<double> end_head;
};

/// Accumulates `scale` times the gradient of one input's loss into `grad`
/// and returns the unscaled loss.
double accumulate_gradient(const EncodedInput& input,
                           const PointerModelParams& params, double scale,
                           Gradient& grad);

Gradient batch_gradient(std::span<const EncodedInput> batch,
                        const PointerModelParams& params, double* loss_out = nullptr);

inline constexpr std::size_t kDefaultModelDim = 64;
inline constexpr double kDefaultLearningRate = 1e-2;

struct TrainConfig {
  double learning_rate = kDefaultLearningRate;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t dim = kDefaultModelDim;

  void validate() const;
};

/// Adagrad: per-parameter step lr * g / (sqrt(sum g^2) + eps).
class Adagrad {
 public:
  Adagrad(const PointerModelParams& params, double learning_rate);
  void step(PointerModelParams& params, const Gradient& grad);

 private:
  double lr_;
  PointerModelParams accum_;
};

struct TrainResult {
  PointerModelParams params;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  std::size_t best_epoch = 0;
};

/// Produces the batches of one epoch.
using BatchSource =
    std::function<std::vector<std::vector<EncodedInput>>(std::size_t epoch)>;

/// Called after each epoch; returns a selection score (higher is better).
/// The parameters with the best score are returned.
using EpochScorer =
    std::function<double(std::size_t epoch, const PointerModelParams& params)>;

/// Adagrad over the batches; deterministic given config.seed. Throws
/// DivergenceError when a loss becomes non-finite.
TrainResult train(const BatchSource& batches, std::size_t vocab_size,
                  const TrainConfig& config, const EpochScorer& scorer = {});

/// Same batches every epoch.
TrainResult train(const std::vector<std::vector<EncodedInput>>& batches,
                  std::size_t vocab_size, const TrainConfig& config);

class PointerModel : public SpanExtractor {
 public:
  explicit PointerModel(PointerModelParams params) : params_(std::move(params)) {}

  Span predict(const EncodedInput& input) const override {
    return predict_span(forward(input, params_));
  }
  const PointerModelParams& params() const { return params_; }

 private:
  PointerModelParams params_;
};

// Binary format: magic, format version, vocabulary fingerprint, sizes, then
// the parameter blocks as little-endian IEEE doubles.
void save_params(const std::string& path, const PointerModelParams& params,
                 std::uint64_t vocab_fingerprint);
/// Throws DataError when the file was written against another vocabulary.
PointerModelParams load_params(const std::string& path,
                               std::uint64_t vocab_fingerprint);

}  // namespace avexp
