#include "avexp/spanlabel.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "avexp/tokenize.hpp"

namespace avexp {

std::optional<Span> find_span(const TokenList& title, const TokenList& value) {
  if (value.empty()) throw DataError("find_span: empty value");
  auto it = std::search(title.begin(), title.end(), value.begin(), value.end());
  if (it == title.end()) return std::nullopt;
  const auto begin = static_cast<std::size_t>(it - title.begin()) + 1;
  return Span{begin, begin + value.size() - 1};
}

const char* to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kNoMatch:
      return "no_match";
    case DropReason::kMatchTruncated:
      return "match_truncated";
  }
  return "unknown";
}

Example to_example(const CleanTuple& tuple, std::size_t id,
                   std::size_t max_title) {
  Example ex;
  ex.id = id;
  ex.attribute = tuple.attribute;
  ex.title_tokens = tokenize(tuple.title);
  if (ex.title_tokens.size() > max_title) ex.title_tokens.resize(max_title);
  ex.attribute_tokens = tokenize(tuple.attribute);
  if (tuple.value) ex.value = tokenize(*tuple.value);
  return ex;
}

LabelOutcome to_labeled(const CleanTuple& tuple, std::size_t id,
                        std::size_t max_title) {
  LabelOutcome out;
  LabeledExample ex;
  static_cast<Example&>(ex) = to_example(tuple, id, max_title);
  if (!ex.value) {
    ex.is_null = true;
    out.labeled = std::move(ex);
    return out;
  }
  if (ex.value->empty()) throw DataError("tuple value tokenizes to nothing");
  if (auto span = find_span(ex.title_tokens, *ex.value)) {
    ex.gold = *span;
    out.labeled = std::move(ex);
    return out;
  }
  const TokenList full = tokenize(tuple.title);
  out.dropped = full.size() > max_title && find_span(full, *ex.value)
                    ? DropReason::kMatchTruncated
                    : DropReason::kNoMatch;
  return out;
}

Conversion convert(const std::vector<CleanTuple>& tuples, std::size_t max_title,
                   std::size_t first_id) {
  Conversion c;
  c.report.input = tuples.size();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    auto outcome = to_labeled(tuples[i], first_id + i, max_title);
    if (outcome.labeled) {
      if (outcome.labeled->is_null) ++c.report.null_labels;
      c.examples.push_back(*outcome.labeled);
      c.labeled.push_back(std::move(*outcome.labeled));
      ++c.report.emitted;
    } else {
      if (*outcome.dropped == DropReason::kNoMatch) {
        ++c.report.no_match;
      } else {
        ++c.report.match_truncated;
      }
      c.examples.push_back(to_example(tuples[i], first_id + i, max_title));
    }
  }
  return c;
}

void write_labeled_jsonl(std::ostream& out,
                         const std::vector<LabeledExample>& examples) {
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    j["attribute"] = ex.attribute;
    j["title_tokens"] = ex.title_tokens;
    j["attribute_tokens"] = ex.attribute_tokens;
    j["value_tokens"] = ex.value ? nlohmann::ordered_json(*ex.value) : nullptr;
    j["gold_begin"] = ex.gold.begin;
    j["gold_end"] = ex.gold.end;
    j["is_null"] = ex.is_null;
    out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace)
        << '\n';
  }
}

std::vector<LabeledExample> read_labeled_jsonl(std::istream& in) {
  std::vector<LabeledExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledExample ex;
      ex.id = j.at("id").get<std::size_t>();
      ex.attribute = j.at("attribute").get<std::string>();
      ex.title_tokens = j.at("title_tokens").get<TokenList>();
      ex.attribute_tokens = j.at("attribute_tokens").get<TokenList>();
      if (!j.at("value_tokens").is_null()) {
        ex.value = j.at("value_tokens").get<TokenList>();
      }
      ex.gold = {j.at("gold_begin").get<std::size_t>(),
                 j.at("gold_end").get<std::size_t>()};
      ex.is_null = j.at("is_null").get<bool>();
      if (ex.is_null != ex.gold.is_null() || ex.gold.begin > ex.gold.end ||
          ex.gold.end > ex.title_tokens.size()) {
        throw DataError("labeled example " + std::to_string(ex.id) +
                        ": inconsistent gold span");
      }
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("labeled jsonl: ") + e.what());
    }
  }
  return out;
}

std::string drop_report_json(const DropReport& r) {
  nlohmann::ordered_json j;
  j["input"] = r.input;
  j["emitted"] = r.emitted;
  j["null_labels"] = r.null_labels;
  j["dropped"] = {{"no_match", r.no_match},
                  {"match_truncated", r.match_truncated}};
  return j.dump(2);
}

}  // namespace avexp
