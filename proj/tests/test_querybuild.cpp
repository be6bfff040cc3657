#include <doctest.h>

#include <sstream>

#include "avexp/querybuild.hpp"

using namespace avexp;

namespace {

Vocabulary small_vocab() {
  return build_vocab(std::vector<TokenList>{
      {"red", "shoes", "for", "men", "color", "blue", "dark", "size", "xl"}});
}

LabeledExample shoe() {
  LabeledExample ex;
  ex.id = 3;
  ex.attribute = "color";
  ex.title_tokens = {"red", "shoes", "for", "men"};
  ex.attribute_tokens = {"color"};
  ex.value = TokenList{"red"};
  ex.gold = {1, 1};
  return ex;
}

std::string render(const EncodedInput& in, const Vocabulary& v) {
  std::ostringstream out;
  dump_input(out, in, v);
  return out.str();
}

const std::vector<KnownValue> kColors = {{{"red"}, "red", 2}, {{"blue"}, "blue", 1}};

}  // namespace

TEST_CASE("layouts per mode") {
  const auto v = small_vocab();
  const auto ex = shoe();
  const auto vals = without_dropout(kColors);
  CHECK(render(build_input(ex, {}, QueryMode::kPlain, v), v) ==
        "[CLS]/S red/T shoes/T for/T men/T [SEP]/S color/A [SEP]/S\n");
  CHECK(render(build_input(ex, vals, QueryMode::kVals, v), v) ==
        "[CLS]/S red/T shoes/T for/T men/T [SEP]/S color/A [SEP]/S red/V [SEP]/S blue/V\n");
  CHECK(render(build_input(ex, vals, QueryMode::kMixingSeen, v), v) ==
        "[CLS]/S red/T shoes/T for/T men/T [SEP]/S [SEEN]/S color/A [SEP]/S red/V [SEP]/S "
        "blue/V\n");
  CHECK(render(build_input(ex, vals, QueryMode::kMixingUnseen, v), v) ==
        "[CLS]/S red/T shoes/T for/T men/T [SEP]/S [UNSEEN]/S color/A [SEP]/S\n");
  // an empty value list degenerates to the plain layout
  CHECK(build_input(ex, {}, QueryMode::kVals, v).ids ==
        build_input(ex, {}, QueryMode::kPlain, v).ids);
}

TEST_CASE("value string is cut at the query budget mid-value") {
  const auto v = small_vocab();
  const auto ex = shoe();
  const std::vector<QueryValue> vals = {{{"dark", "blue"}}, {{"red"}}};
  QueryBudget b;
  b.expanded_query = 3;  // color SEP dark
  const auto in = build_input(ex, vals, QueryMode::kVals, v, b);
  CHECK(render(in, v) == "[CLS]/S red/T shoes/T for/T men/T [SEP]/S color/A [SEP]/S dark/V\n");
}

TEST_CASE("overlong attribute is truncated") {
  const auto v = small_vocab();
  auto ex = shoe();
  ex.attribute_tokens = TokenList(40, "size");
  const auto in = build_input(ex, {}, QueryMode::kPlain, v);
  CHECK(in.attribute_truncated);
  CHECK(in.count_role(Role::kAttr) == 31);
  CHECK(in.size() - in.title_length - 2 == 32);
}

TEST_CASE("dropped values keep their length as PAD") {
  const auto v = small_vocab();
  const auto ex = shoe();
  const std::vector<QueryValue> kept = {{{"dark", "blue"}}};
  const std::vector<QueryValue> dropped = {{{std::string(kPadToken), std::string(kPadToken)}, true}};
  const auto a = build_input(ex, kept, QueryMode::kVals, v);
  const auto b = build_input(ex, dropped, QueryMode::kVals, v);
  CHECK(a.size() == b.size());
  CHECK(b.ids[b.size() - 1] == kPadId);
  CHECK(b.ids[b.size() - 2] == kPadId);
}

TEST_CASE("eval inputs follow KB membership under mixing") {
  const auto v = small_vocab();
  const auto ex = shoe();
  KnowledgeBase kb = build_kb({{"red shoes", "color", "red"}, {"x", "size", std::nullopt}});
  const TrainingVariant mix{true, true, true};
  CHECK(build_eval_input(ex, kb, mix, v).knowledge == KnowledgeFlag::kSeen);
  auto unseen = ex;
  unseen.attribute = "brand";
  CHECK(build_eval_input(unseen, kb, mix, v).knowledge == KnowledgeFlag::kUnseen);
  auto empty = ex;
  empty.attribute = "size";
  const auto e = build_eval_input(empty, kb, mix, v);
  CHECK(e.knowledge == KnowledgeFlag::kUnseen);
  CHECK(e.count_role(Role::kValue) == 0);
  CHECK(build_eval_input(ex, kb, TrainingVariant{}, v).count_role(Role::kValue) == 0);
  CHECK(build_eval_input(ex, kb, TrainingVariant{true}, v).count_role(Role::kValue) == 1);
}

TEST_CASE("variant validation") {
  CHECK_THROWS_AS((TrainingVariant{false, true, false}.validate()), UsageError);
  CHECK_THROWS_AS((TrainingVariant{false, false, true}.validate()), UsageError);
  CHECK_NOTHROW((TrainingVariant{true, true, true}.validate()));
  CHECK(TrainingVariant{true, true, true}.name() == "vals+drop+mixing");
}

TEST_CASE("mixed batches pair SEEN and UNSEEN twins") {
  const auto v = small_vocab();
  std::vector<LabeledExample> exs(16, shoe());
  for (std::size_t i = 0; i < exs.size(); ++i) exs[i].id = i;
  const KnowledgeBase kb = build_kb({{"t", "color", "red"}, {"t", "color", "blue"}});
  Rng rng(4);
  const auto batch = make_mixed_batch(exs, kb, TrainingVariant{true, true, true}, v, rng);
  REQUIRE(batch.size() == 32);
  for (std::size_t i = 0; i < batch.size(); i += 2) {
    CHECK(batch[i].knowledge == KnowledgeFlag::kSeen);
    CHECK(batch[i + 1].knowledge == KnowledgeFlag::kUnseen);
    CHECK(batch[i].example_id == batch[i + 1].example_id);
    CHECK(batch[i].gold == batch[i + 1].gold);
    CHECK(batch[i + 1].count_role(Role::kValue) == 0);
  }
  Rng rng2(4);
  CHECK(make_mixed_batch(exs, kb, TrainingVariant{true}, v, rng2).size() == 16);
}

TEST_CASE("epoch batches are deterministic and cover every example") {
  const auto v = small_vocab();
  std::vector<LabeledExample> exs(37, shoe());
  for (std::size_t i = 0; i < exs.size(); ++i) exs[i].id = i;
  const KnowledgeBase kb = build_kb({{"t", "color", "red"}});
  const TrainingVariant mix{true, true, true};
  const auto a = make_epoch_batches(exs, kb, mix, v, 8, 5, 0);
  const auto b = make_epoch_batches(exs, kb, mix, v, 8, 5, 0);
  std::vector<int> seen(exs.size(), 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    CHECK(a[i].size() <= 8);
    for (std::size_t k = 0; k < a[i].size(); ++k) {
      CHECK(a[i][k].ids == b[i][k].ids);
      ++seen[a[i][k].example_id];
    }
  }
  for (int s : seen) CHECK(s == 2);
  CHECK_THROWS_AS(make_epoch_batches(exs, kb, mix, v, 1, 5, 0), UsageError);
}
