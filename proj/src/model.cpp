#include "avexp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace avexp {

namespace {

constexpr char kMagic[8] = {'A', 'V', 'X', 'P', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kAdagradEps = 1e-8;

bool is_query_token(const EncodedInput& in, std::size_t i) {
  if (in.ids[i] == kPadId) return false;
  switch (in.roles[i]) {
    case Role::kAttr:
    case Role::kValue:
      return true;
    case Role::kSpecial:
      return in.ids[i] == kSeenId || in.ids[i] == kUnseenId;
    case Role::kTitle:
      return false;
  }
  return false;
}

// Intermediate values shared by forward and backward.
struct Activations {
  std::vector<TokenId> query_ids;
  std::vector<TokenId> positions;  // CLS, then the title tokens
  std::vector<double> mean;
  std::vector<double> q;
  Logits logits;
};

TokenId clamp_id(TokenId id, const PointerModelParams& p) {
  return id < p.vocab_size ? id : kUnkId;
}

Activations run_forward(const EncodedInput& in, const PointerModelParams& p) {
  const std::size_t d = p.dim;
  Activations a;
  a.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!is_query_token(in, i)) continue;
    const TokenId id = clamp_id(in.ids[i], p);
    a.query_ids.push_back(id);
    const double* e = p.embed(id);
    for (std::size_t k = 0; k < d; ++k) a.mean[k] += e[k];
  }
  if (!a.query_ids.empty()) {
    const double inv = 1.0 / static_cast<double>(a.query_ids.size());
    for (auto& v : a.mean) v *= inv;
  }
  a.q.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double* row = &p.query_weights[j * d];
    double h = 0.0;
    for (std::size_t k = 0; k < d; ++k) h += row[k] * a.mean[k];
    a.q[j] = std::tanh(h);
  }
  std::vector<double> qs(d), qe(d);
  for (std::size_t k = 0; k < d; ++k) {
    qs[k] = a.q[k] * p.start_head[k];
    qe[k] = a.q[k] * p.end_head[k];
  }
  const std::size_t n = in.title_length;
  a.positions.reserve(n + 1);
  a.positions.push_back(kClsId);
  for (std::size_t i = 0; i < n; ++i) {
    a.positions.push_back(clamp_id(in.ids[in.title_offset + i], p));
  }
  a.logits.start.resize(n + 1);
  a.logits.end.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double* x = p.embed(a.positions[i]);
    double s = 0.0, e = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      s += qs[k] * x[k];
      e += qe[k] * x[k];
    }
    a.logits.start[i] = s;
    a.logits.end[i] = e;
  }
  return a;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::vector<double>& grad_row(Gradient& g, TokenId id, std::size_t d) {
  auto& row = g.embedding[id];
  if (row.empty()) row.assign(d, 0.0);
  return row;
}

}  // namespace

PointerModelParams::PointerModelParams(std::size_t vocab_size, std::size_t dim)
    : vocab_size(vocab_size),
      dim(dim),
      embedding(vocab_size * dim, 0.0),
      query_weights(dim * dim, 0.0),
      start_head(dim, 0.0),
      end_head(dim, 0.0) {}

PointerModelParams PointerModelParams::random(std::size_t vocab_size,
                                              std::size_t dim, std::uint64_t seed,
                                              double scale) {
  PointerModelParams p(vocab_size, dim);
  Rng rng(seed);
  for (auto block : p.blocks()) {
    for (auto& v : block) v = (2.0 * rng.uniform() - 1.0) * scale;
  }
  return p;
}

std::size_t PointerModelParams::parameter_count() const {
  return embedding.size() + query_weights.size() + start_head.size() +
         end_head.size();
}

bool PointerModelParams::all_finite() const {
  for (auto block : blocks()) {
    for (double v : block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<std::span<double>> PointerModelParams::blocks() {
  return {embedding, query_weights, start_head, end_head};
}

std::vector<std::span<const double>> PointerModelParams::blocks() const {
  return {embedding, query_weights, start_head, end_head};
}

Logits forward(const EncodedInput& input, const PointerModelParams& params) {
  return run_forward(input, params).logits;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return p;
}

double loss(const Logits& logits, const Span& gold) {
  return (log_sum_exp(logits.start) - logits.start.at(gold.begin)) +
         (log_sum_exp(logits.end) - logits.end.at(gold.end));
}

double batch_loss(std::span<const EncodedInput> batch,
                  const PointerModelParams& params) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& in : batch) total += loss(forward(in, params), in.gold);
  return total / static_cast<double>(batch.size());
}

Span predict_span(const Logits& logits) {
  const std::size_t n = logits.start.size() - 1;
  Span best{0, 0};
  double best_score = logits.start[0] + logits.end[0];
  for (std::size_t b = 1; b <= n; ++b) {
    for (std::size_t e = b; e <= n; ++e) {
      const double score = logits.start[b] + logits.end[e];
      if (score > best_score) {
        best_score = score;
        best = {b, e};
      }
    }
  }
  return best;
}

double accumulate_gradient(const EncodedInput& input,
                           const PointerModelParams& p, double scale,
                           Gradient& grad) {
  const std::size_t d = p.dim;
  if (grad.query_weights.empty()) {
    grad.query_weights.assign(d * d, 0.0);
    grad.start_head.assign(d, 0.0);
    grad.end_head.assign(d, 0.0);
  }
  const Activations a = run_forward(input, p);
  const double value = loss(a.logits, input.gold);

  std::vector<double> gs = softmax(a.logits.start);
  std::vector<double> ge = softmax(a.logits.end);
  gs[input.gold.begin] -= 1.0;
  ge[input.gold.end] -= 1.0;

  std::vector<double> dq(d, 0.0);
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    const double* x = p.embed(a.positions[i]);
    const double s_i = gs[i] * scale;
    const double e_i = ge[i] * scale;
    auto& dx = grad_row(grad, a.positions[i], d);
    for (std::size_t k = 0; k < d; ++k) {
      dq[k] += (s_i * p.start_head[k] + e_i * p.end_head[k]) * x[k];
      grad.start_head[k] += s_i * a.q[k] * x[k];
      grad.end_head[k] += e_i * a.q[k] * x[k];
      dx[k] += a.q[k] * (s_i * p.start_head[k] + e_i * p.end_head[k]);
    }
  }

  std::vector<double> dh(d);
  for (std::size_t j = 0; j < d; ++j) dh[j] = dq[j] * (1.0 - a.q[j] * a.q[j]);
  std::vector<double> dm(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double* row = &p.query_weights[j * d];
    double* grow = &grad.query_weights[j * d];
    for (std::size_t k = 0; k < d; ++k) {
      grow[k] += dh[j] * a.mean[k];
      dm[k] += row[k] * dh[j];
    }
  }
  if (!a.query_ids.empty()) {
    const double inv = 1.0 / static_cast<double>(a.query_ids.size());
    for (TokenId id : a.query_ids) {
      auto& row = grad_row(grad, id, d);
      for (std::size_t k = 0; k < d; ++k) row[k] += dm[k] * inv;
    }
  }
  return value;
}

Gradient batch_gradient(std::span<const EncodedInput> batch,
                        const PointerModelParams& params, double* loss_out) {
  Gradient g;
  g.query_weights.assign(params.dim * params.dim, 0.0);
  g.start_head.assign(params.dim, 0.0);
  g.end_head.assign(params.dim, 0.0);
  double total = 0.0;
  if (!batch.empty()) {
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& in : batch) total += accumulate_gradient(in, params, scale, g);
    total *= scale;
  }
  if (loss_out) *loss_out = total;
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be finite and non-negative");
  }
  if (epochs < 1) throw UsageError("epochs must be at least 1");
  if (batch_size < 1) throw UsageError("batch size must be at least 1");
  if (dim < 2) throw UsageError("model dimension must be at least 2");
}

Adagrad::Adagrad(const PointerModelParams& params, double learning_rate)
    : lr_(learning_rate), accum_(params.vocab_size, params.dim) {}

void Adagrad::step(PointerModelParams& params, const Gradient& grad) {
  auto update = [this](double* p, double* acc, const double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += g[i] * g[i];
      p[i] -= lr_ * g[i] / (std::sqrt(acc[i]) + kAdagradEps);
    }
  };
  const std::size_t d = params.dim;
  for (const auto& [id, row] : grad.embedding) {
    if (id == kPadId) continue;
    update(&params.embedding[id * d], &accum_.embedding[id * d], row.data(), d);
  }
  update(params.query_weights.data(), accum_.query_weights.data(),
         grad.query_weights.data(), d * d);
  update(params.start_head.data(), accum_.start_head.data(),
         grad.start_head.data(), d);
  update(params.end_head.data(), accum_.end_head.data(), grad.end_head.data(), d);
}

TrainResult train(const BatchSource& batches, std::size_t vocab_size,
                  const TrainConfig& config, const EpochScorer& scorer) {
  config.validate();
  TrainResult result;
  PointerModelParams params =
      PointerModelParams::random(vocab_size, config.dim, config.seed);
  Adagrad optimizer(params, config.learning_rate);
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_batches = batches(epoch);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& batch : epoch_batches) {
      if (batch.empty()) continue;
      double batch_value = 0.0;
      const Gradient g = batch_gradient(batch, params, &batch_value);
      if (!std::isfinite(batch_value)) {
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(count));
      }
      optimizer.step(params, g);
      total += batch_value;
      ++count;
    }
    result.epoch_loss.push_back(count ? total / static_cast<double>(count) : 0.0);
    if (!params.all_finite()) {
      throw DivergenceError("non-finite parameters after epoch " +
                            std::to_string(epoch));
    }
    if (scorer) {
      const double score = scorer(epoch, params);
      if (score > best_score) {
        best_score = score;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
  }
  if (!scorer) {
    result.best_epoch = config.epochs - 1;
    result.params = std::move(params);
  }
  return result;
}

TrainResult train(const std::vector<std::vector<EncodedInput>>& batches,
                  std::size_t vocab_size, const TrainConfig& config) {
  return train([&](std::size_t) { return batches; }, vocab_size, config);
}

void save_params(const std::string& path, const PointerModelParams& params,
                 std::uint64_t vocab_fingerprint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  auto put = [&](const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  };
  const std::uint64_t sizes[2] = {params.vocab_size, params.dim};
  put(kMagic, sizeof kMagic);
  put(&kFormatVersion, sizeof kFormatVersion);
  put(&vocab_fingerprint, sizeof vocab_fingerprint);
  put(sizes, sizeof sizes);
  for (auto block : params.blocks()) put(block.data(), block.size_bytes());
}

PointerModelParams load_params(const std::string& path,
                               std::uint64_t vocab_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  auto get = [&](void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in) throw DataError(path + ": truncated model file");
  };
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t fingerprint = 0;
  std::uint64_t sizes[2];
  get(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(path + ": not a model file");
  }
  get(&version, sizeof version);
  if (version != kFormatVersion) {
    throw DataError(path + ": unsupported model format version " +
                    std::to_string(version));
  }
  get(&fingerprint, sizeof fingerprint);
  if (fingerprint != vocab_fingerprint) {
    throw DataError(path + ": model was trained with a different vocabulary");
  }
  get(sizes, sizeof sizes);
  PointerModelParams p(sizes[0], sizes[1]);
  for (auto block : p.blocks()) get(block.data(), block.size_bytes());
  return p;
}

}  // namespace avexp
