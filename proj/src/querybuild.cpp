#include "avexp/querybuild.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

namespace avexp {

std::size_t EncodedInput::count_role(Role role) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), role));
}

void TrainingVariant::validate() const {
  if ((drop || mixing) && !vals) {
    throw UsageError("+drop and +mixing require +vals");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0)) {
    throw UsageError("dropout rate must lie in [0, 1]");
  }
}

std::string TrainingVariant::name() const {
  std::string n = "plain";
  if (vals) n = "vals";
  if (drop) n += "+drop";
  if (mixing) n += "+mixing";
  return n;
}

EncodedInput build_input(const Example& example,
                         std::span<const QueryValue> values, QueryMode mode,
                         const Vocabulary& vocab, const QueryBudget& budget) {
  EncodedInput in;
  in.example_id = example.id;
  auto push = [&](TokenId id, Role role) {
    in.ids.push_back(id);
    in.roles.push_back(role);
  };

  push(kClsId, Role::kSpecial);
  const std::size_t n = std::min(example.title_tokens.size(), budget.max_title);
  for (std::size_t i = 0; i < n; ++i) {
    push(vocab.id(example.title_tokens[i]), Role::kTitle);
  }
  in.title_length = n;
  push(kSepId, Role::kSpecial);

  const std::size_t limit = budget.query_limit(mode);
  std::size_t used = 0;
  if (mode == QueryMode::kMixingSeen || mode == QueryMode::kMixingUnseen) {
    const bool seen = mode == QueryMode::kMixingSeen;
    in.knowledge = seen ? KnowledgeFlag::kSeen : KnowledgeFlag::kUnseen;
    push(seen ? kSeenId : kUnseenId, Role::kSpecial);
    ++used;
  }
  // The closing SEP is always kept.
  const std::size_t attr_room = limit > used + 1 ? limit - used - 1 : 0;
  const std::size_t attr_len = std::min(example.attribute_tokens.size(), attr_room);
  if (attr_len < example.attribute_tokens.size()) {
    in.attribute_truncated = true;
    std::cerr << "warning: attribute '" << example.attribute
              << "' truncated to " << attr_len << " tokens\n";
  }
  for (std::size_t i = 0; i < attr_len; ++i) {
    push(vocab.id(example.attribute_tokens[i]), Role::kAttr);
  }
  push(kSepId, Role::kSpecial);
  used += attr_len + 1;

  if (mode != QueryMode::kVals && mode != QueryMode::kMixingSeen) return in;
  std::size_t room = limit > used ? limit - used : 0;
  for (std::size_t v = 0; v < values.size() && room > 0; ++v) {
    if (v > 0) {
      push(kSepId, Role::kSpecial);
      --room;
    }
    for (const auto& tok : values[v].tokens) {
      if (room == 0) break;
      push(tok == kPadToken ? kPadId : vocab.id(tok), Role::kValue);
      --room;
    }
  }
  return in;
}

EncodedInput build_input(const LabeledExample& example,
                         std::span<const QueryValue> values, QueryMode mode,
                         const Vocabulary& vocab, const QueryBudget& budget) {
  EncodedInput in =
      build_input(static_cast<const Example&>(example), values, mode, vocab, budget);
  in.gold = example.gold;
  return in;
}

EncodedInput build_eval_input(const Example& example, const KnowledgeBase& kb,
                              const TrainingVariant& variant,
                              const Vocabulary& vocab,
                              const QueryBudget& budget) {
  if (!variant.vals) return build_input(example, {}, QueryMode::kPlain, vocab, budget);
  const auto* entry = kb.find(example.attribute);
  const auto values = entry ? without_dropout(*entry) : std::vector<QueryValue>{};
  if (!variant.mixing) {
    return build_input(example, values, QueryMode::kVals, vocab, budget);
  }
  const QueryMode mode =
      values.empty() ? QueryMode::kMixingUnseen : QueryMode::kMixingSeen;
  return build_input(example, values, mode, vocab, budget);
}

std::vector<EncodedInput> make_mixed_batch(
    std::span<const LabeledExample> examples, const KnowledgeBase& kb,
    const TrainingVariant& variant, const Vocabulary& vocab, Rng& rng,
    const QueryBudget& budget) {
  std::vector<EncodedInput> batch;
  batch.reserve(examples.size() * (variant.mixing ? 2 : 1));
  const std::vector<KnownValue> empty;
  for (const auto& ex : examples) {
    if (!variant.vals) {
      batch.push_back(build_input(ex, {}, QueryMode::kPlain, vocab, budget));
      continue;
    }
    const auto* entry = kb.find(ex.attribute);
    const auto& known = entry ? *entry : empty;
    const auto values = variant.drop
                            ? apply_dropout(known, variant.dropout_rate, rng)
                            : without_dropout(known);
    if (variant.mixing) {
      batch.push_back(build_input(ex, values, QueryMode::kMixingSeen, vocab, budget));
      batch.push_back(build_input(ex, {}, QueryMode::kMixingUnseen, vocab, budget));
    } else {
      batch.push_back(build_input(ex, values, QueryMode::kVals, vocab, budget));
    }
  }
  return batch;
}

std::vector<std::vector<EncodedInput>> make_epoch_batches(
    const std::vector<LabeledExample>& examples, const KnowledgeBase& kb,
    const TrainingVariant& variant, const Vocabulary& vocab,
    std::size_t batch_size, std::uint64_t seed, std::size_t epoch,
    const QueryBudget& budget) {
  if (variant.mixing && batch_size < 2) {
    throw UsageError("mixing needs a batch size of at least 2");
  }
  if (batch_size == 0) throw UsageError("batch size must be positive");
  const std::size_t per_batch = variant.mixing ? batch_size / 2 : batch_size;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler(derive_seed(seed, 2 * epoch));
  shuffler.shuffle(order);

  std::vector<std::vector<EncodedInput>> batches;
  std::vector<LabeledExample> group;
  const std::uint64_t epoch_seed = derive_seed(seed, 2 * epoch + 1);
  for (std::size_t start = 0; start < order.size(); start += per_batch) {
    group.clear();
    const std::size_t stop = std::min(order.size(), start + per_batch);
    for (std::size_t k = start; k < stop; ++k) group.push_back(examples[order[k]]);
    Rng rng(derive_seed(epoch_seed, batches.size()));
    batches.push_back(make_mixed_batch(group, kb, variant, vocab, rng, budget));
  }
  return batches;
}

void dump_input(std::ostream& out, const EncodedInput& input,
                const Vocabulary& vocab) {
  static constexpr const char* kRoleNames[] = {"S", "T", "A", "V"};
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i) out << ' ';
    out << vocab.surface(input.ids[i]) << '/'
        << kRoleNames[static_cast<int>(input.roles[i])];
  }
  out << '\n';
}

}  // namespace avexp
