#include "avexp/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "avexp/tokenize.hpp"

namespace avexp {

namespace {

bool value_order(const KnownValue& a, const KnownValue& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.surface < b.surface;
}

TokenList split_surface(const std::string& surface) {
  TokenList out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = surface.find(' ', start);
    out.push_back(surface.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const std::vector<KnownValue>* KnowledgeBase::find(
    const std::string& attribute) const {
  auto it = entries_.find(attribute);
  return it == entries_.end() ? nullptr : &it->second;
}

bool KnowledgeBase::has_values(const std::string& attribute) const {
  const auto* values = find(attribute);
  return values && !values->empty();
}

std::size_t KnowledgeBase::pair_count() const {
  std::size_t n = 0;
  for (const auto& [attr, values] : entries_) n += values.size();
  return n;
}

void KnowledgeBase::add(const CleanTuple& tuple) {
  auto& values = entries_[tuple.attribute];
  if (tuple.is_null()) return;
  TokenList tokens = tokenize(*tuple.value);
  if (tokens.empty()) return;
  std::string surface = detokenize(tokens);
  auto it = std::find_if(values.begin(), values.end(),
                         [&](const KnownValue& v) { return v.surface == surface; });
  if (it != values.end()) {
    ++it->count;
  } else {
    values.push_back({std::move(tokens), std::move(surface), 1});
  }
}

void KnowledgeBase::sort() {
  for (auto& [attr, values] : entries_) {
    std::sort(values.begin(), values.end(), value_order);
  }
}

void KnowledgeBase::write(std::ostream& out) const {
  out << nlohmann::ordered_json{{"source", source_}}.dump() << '\n';
  for (const auto& [attr, values] : entries_) {
    nlohmann::ordered_json j;
    j["attribute"] = attr;
    j["values"] = nlohmann::ordered_json::array();
    for (const auto& v : values) {
      j["values"].push_back({{"surface", v.surface}, {"count", v.count}});
    }
    out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace)
        << '\n';
  }
}

KnowledgeBase KnowledgeBase::read(std::istream& in) {
  KnowledgeBase kb("unknown");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!j.contains("attribute")) {
        kb.source_ = j.at("source").get<std::string>();
        continue;
      }
      auto& values = kb.entries_[j.at("attribute").get<std::string>()];
      for (const auto& v : j.at("values")) {
        KnownValue kv;
        kv.surface = v.at("surface").get<std::string>();
        kv.count = v.at("count").get<std::size_t>();
        kv.tokens = split_surface(kv.surface);
        if (kv.count == 0) throw DataError("knowledge base: zero count");
        values.push_back(std::move(kv));
      }
      if (!std::is_sorted(values.begin(), values.end(), value_order)) {
        throw DataError("knowledge base: values out of order for '" +
                        j.at("attribute").get<std::string>() + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("knowledge base: ") + e.what());
    }
  }
  return kb;
}

void KnowledgeBase::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write(out);
}

KnowledgeBase KnowledgeBase::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read(in);
}

KnowledgeBase build_kb(const std::vector<CleanTuple>& train) {
  KnowledgeBase kb("train");
  for (const auto& t : train) kb.add(t);
  kb.sort();
  return kb;
}

KnowledgeBase merge(const KnowledgeBase& kb, const std::vector<CleanTuple>& extra,
                    const std::string& extra_tag) {
  KnowledgeBase out = kb;
  if (extra.empty()) return out;
  for (const auto& t : extra) out.add(t);
  out.sort();
  out.set_source(kb.source() + "+" + extra_tag);
  return out;
}

double drop_probability(double rate, std::size_t count) {
  return std::pow(rate, static_cast<double>(count));
}

std::vector<QueryValue> apply_dropout(const std::vector<KnownValue>& values,
                                      double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw UsageError("dropout rate must lie in [0, 1]");
  }
  std::vector<QueryValue> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    QueryValue q;
    // One draw per value keeps the stream aligned regardless of outcome.
    q.dropped = rng.uniform() < drop_probability(rate, v.count);
    q.tokens = q.dropped ? TokenList(v.tokens.size(), std::string(kPadToken))
                         : v.tokens;
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QueryValue> apply_dropout(const std::vector<KnownValue>& values,
                                      const DropoutConfig& config) {
  Rng rng(config.seed);
  return apply_dropout(values, config.rate, rng);
}

std::vector<QueryValue> without_dropout(const std::vector<KnownValue>& values) {
  std::vector<QueryValue> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back({v.tokens, false});
  return out;
}

}  // namespace avexp
