#pragma once

// Random inputs and parameters shared by the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <vector>

#include "avexp/model.hpp"
#include "avexp/querybuild.hpp"

namespace support {

// A well-formed input with title length in [1, max_n], optional knowledge
// token, a few attribute tokens and values that may contain PAD runs.
inline avexp::EncodedInput random_input(avexp::Rng& rng, std::size_t vocab_size,
                                        std::size_t max_n) {
  using namespace avexp;
  auto word = [&] { return static_cast<TokenId>(kNumReserved + rng.below(vocab_size - kNumReserved)); };
  EncodedInput in;
  auto push = [&](TokenId id, Role r) {
    in.ids.push_back(id);
    in.roles.push_back(r);
  };
  push(kClsId, Role::kSpecial);
  in.title_length = 1 + rng.below(max_n);
  for (std::size_t i = 0; i < in.title_length; ++i) push(word(), Role::kTitle);
  push(kSepId, Role::kSpecial);
  const auto flag = rng.below(3);
  if (flag == 1) push(kSeenId, Role::kSpecial), in.knowledge = KnowledgeFlag::kSeen;
  if (flag == 2) push(kUnseenId, Role::kSpecial), in.knowledge = KnowledgeFlag::kUnseen;
  const std::size_t attr = 1 + rng.below(3);
  for (std::size_t i = 0; i < attr; ++i) push(word(), Role::kAttr);
  push(kSepId, Role::kSpecial);
  if (flag != 2) {
    const std::size_t values = rng.below(4);
    for (std::size_t v = 0; v < values; ++v) {
      if (v) push(kSepId, Role::kSpecial);
      const bool pad = rng.bernoulli(0.3);
      const std::size_t len = 1 + rng.below(2);
      for (std::size_t k = 0; k < len; ++k) push(pad ? kPadId : word(), Role::kValue);
    }
  }
  if (rng.bernoulli(0.3)) {
    in.gold = {0, 0};
  } else {
    const std::size_t b = 1 + rng.below(in.title_length);
    in.gold = {b, b + rng.below(in.title_length - b + 1)};
  }
  return in;
}

inline avexp::PointerModelParams random_params(avexp::Rng& rng, std::size_t vocab,
                                               std::size_t dim, double scale) {
  auto p = avexp::PointerModelParams(vocab, dim);
  for (auto block : p.blocks()) {
    for (auto& x : block) x = (2.0 * rng.uniform() - 1.0) * scale;
  }
  return p;
}

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace support
