#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive and share no code with src/.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avexp/knowledge.hpp"
#include "avexp/model.hpp"
#include "avexp/querybuild.hpp"

namespace oracle {

// First 1-indexed window of `title` equal to `value`, by comparing every
// window token by token.
inline std::optional<std::pair<std::size_t, std::size_t>> window_scan(
    const std::vector<std::string>& title, const std::vector<std::string>& value) {
  if (value.empty() || value.size() > title.size()) return std::nullopt;
  for (std::size_t b = 0; b + value.size() <= title.size(); ++b) {
    bool same = true;
    for (std::size_t k = 0; k < value.size(); ++k) {
      if (title[b + k] != value[k]) {
        same = false;
        break;
      }
    }
    if (same) return std::pair{b + 1, b + value.size()};
  }
  return std::nullopt;
}

// Enumerates every (value, position) match and keeps the value with the
// highest count; ties go to the lexicographically smaller surface.
inline std::optional<std::vector<std::string>> max_count_match(
    const std::vector<std::string>& title, const std::string& attribute,
    const avexp::KnowledgeBase& kb) {
  const auto it = kb.entries().find(attribute);
  if (it == kb.entries().end()) return std::nullopt;
  const avexp::KnownValue* best = nullptr;
  for (const auto& v : it->second) {
    for (std::size_t b = 0; b + v.tokens.size() <= title.size(); ++b) {
      bool same = true;
      for (std::size_t k = 0; k < v.tokens.size(); ++k) {
        same = same && title[b + k] == v.tokens[k];
      }
      if (!same) continue;
      if (!best || v.count > best->count ||
          (v.count == best->count && v.surface < best->surface)) {
        best = &v;
      }
    }
  }
  if (!best) return std::nullopt;
  return best->tokens;
}

using real = long double;

// Forward pass and loss written directly from the model definition, in
// extended precision.
struct Reference {
  std::vector<real> start, end;
};

inline Reference reference_forward(const avexp::EncodedInput& in, const avexp::PointerModelParams& p) {
  const std::size_t d = p.dim;
  std::vector<real> m(d, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < in.ids.size(); ++i) {
    const bool query = in.roles[i] == avexp::Role::kAttr || in.roles[i] == avexp::Role::kValue ||
                       in.ids[i] == avexp::kSeenId || in.ids[i] == avexp::kUnseenId;
    if (!query || in.ids[i] == avexp::kPadId) continue;
    for (std::size_t k = 0; k < d; ++k) m[k] += p.embedding[in.ids[i] * d + k];
    ++count;
  }
  if (count) {
    for (auto& x : m) x /= static_cast<real>(count);
  }
  std::vector<real> q(d);
  for (std::size_t r = 0; r < d; ++r) {
    real acc = 0;
    for (std::size_t c = 0; c < d; ++c) acc += p.query_weights[r * d + c] * m[c];
    q[r] = std::tanh(acc);
  }
  Reference out;
  for (std::size_t i = 0; i <= in.title_length; ++i) {
    const std::size_t pos = i == 0 ? 0 : in.title_offset + i - 1;
    const avexp::TokenId id = in.ids[pos];
    real s = 0, e = 0;
    for (std::size_t k = 0; k < d; ++k) {
      s += q[k] * p.start_head[k] * p.embedding[id * d + k];
      e += q[k] * p.end_head[k] * p.embedding[id * d + k];
    }
    out.start.push_back(s);
    out.end.push_back(e);
  }
  return out;
}

inline real cross_entropy(const std::vector<real>& logits, std::size_t gold) {
  real mx = logits[0];
  for (real x : logits) mx = std::max(mx, x);
  real z = 0;
  for (real x : logits) z += std::exp(x - mx);
  return -(logits[gold] - mx - std::log(z));
}

inline real reference_loss(const avexp::EncodedInput& in, const avexp::PointerModelParams& p) {
  const auto r = reference_forward(in, p);
  return cross_entropy(r.start, in.gold.begin) + cross_entropy(r.end, in.gold.end);
}

inline real batch_loss(const std::vector<avexp::EncodedInput>& batch,
                       const avexp::PointerModelParams& p) {
  real total = 0;
  for (const auto& in : batch) total += reference_loss(in, p);
  return total / static_cast<real>(batch.size());
}

}  // namespace oracle
