#include "avexp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "avexp/tokenize.hpp"

namespace avexp {

Counts& Counts::operator+=(const Counts& o) {
  true_positives += o.true_positives;
  predicted += o.predicted;
  gold += o.gold;
  examples += o.examples;
  return *this;
}

Prf prf(const Counts& c) {
  Prf r;
  if (c.predicted) r.precision = static_cast<double>(c.true_positives) / c.predicted;
  if (c.gold) r.recall = static_cast<double>(c.true_positives) / c.gold;
  if (c.true_positives) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

Counts example_counts(const std::optional<TokenList>& gold,
                      const std::optional<TokenList>& predicted,
                      const ScoreOptions& options) {
  Counts c;
  c.examples = 1;
  if (gold) ++c.gold;
  if (predicted || (options.strict && gold)) ++c.predicted;
  if (gold && predicted && *gold == *predicted) ++c.true_positives;
  return c;
}

Score score(const std::vector<Example>& golds,
            const std::vector<Prediction>& predictions,
            const ScoreOptions& options) {
  std::unordered_map<std::size_t, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.example_id, &p).second) {
      throw DataError("duplicate prediction for example " +
                      std::to_string(p.example_id));
    }
  }
  if (by_id.size() != golds.size()) {
    // Either an unknown id or a missing one; find which for the message.
    std::unordered_map<std::size_t, bool> gold_ids;
    for (const auto& g : golds) gold_ids.emplace(g.id, true);
    for (const auto& p : predictions) {
      if (!gold_ids.count(p.example_id)) {
        throw DataError("prediction for unknown example " +
                        std::to_string(p.example_id));
      }
    }
  }
  Score s;
  for (const auto& g : golds) {
    auto it = by_id.find(g.id);
    if (it == by_id.end()) {
      throw DataError("missing prediction for example " + std::to_string(g.id));
    }
    const Counts c = example_counts(g.value, it->second->value, options);
    s.counts += c;
    s.per_attribute[g.attribute].counts += c;
  }
  s.micro = prf(s.counts);
  for (auto& [attr, a] : s.per_attribute) {
    a.prf = prf(a.counts);
    if (a.counts.gold == 0) {
      ++s.excluded_null_only;
      continue;
    }
    s.macro.precision += a.prf.precision;
    s.macro.recall += a.prf.recall;
    s.macro.f1 += a.prf.f1;
    ++s.macro_attributes;
  }
  if (s.macro_attributes) {
    const double n = static_cast<double>(s.macro_attributes);
    s.macro.precision /= n;
    s.macro.recall /= n;
    s.macro.f1 /= n;
  }
  return s;
}

const char* to_string(ValueCategory c) {
  switch (c) {
    case ValueCategory::kSeenAttrSeenValue:
      return "seen-attr-seen-value";
    case ValueCategory::kSeenAttrUnseenValue:
      return "seen-attr-unseen-value";
    case ValueCategory::kUnseenAttr:
      return "unseen-attr";
  }
  return "unknown";
}

ValueCategory categorize_example(const Example& example,
                                 const KnowledgeBase& train_kb) {
  const auto* values = train_kb.find(example.attribute);
  if (!values) return ValueCategory::kUnseenAttr;
  if (!example.value) return ValueCategory::kSeenAttrSeenValue;
  const std::string surface = detokenize(*example.value);
  const bool seen = std::any_of(values->begin(), values->end(),
                                [&](const KnownValue& v) { return v.surface == surface; });
  return seen ? ValueCategory::kSeenAttrSeenValue
              : ValueCategory::kSeenAttrUnseenValue;
}

std::vector<double> HashedNgramEmbedder::operator()(const TokenList& tokens) const {
  std::vector<double> v(dim_, 0.0);
  for (const auto& tok : tokens) {
    const std::string padded = "<" + tok + ">";
    const std::size_t n = std::min(n_, padded.size());
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      const std::uint64_t h = fnv1a(std::string_view(padded).substr(i, n));
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<double> ambiguity_score(const std::string& attribute,
                                      const KnowledgeBase& kb,
                                      const Embedder& embedder) {
  const auto* values = kb.find(attribute);
  if (!values || values->empty()) return std::nullopt;
  std::vector<double> mean;
  for (const auto& v : *values) {
    const auto e = embedder(v.tokens);
    if (mean.empty()) mean.assign(e.size(), 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) mean[k] += e[k];
  }
  for (auto& x : mean) x /= static_cast<double>(values->size());
  return cosine(embedder(tokenize(attribute)), mean);
}

std::string AttributeProfile::bucket() const {
  return std::string(high_frequency ? "hi" : "lo") + "-freq/" +
         (high_similarity ? "hi" : "lo") + "-sim";
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Medians bucketize(std::vector<AttributeProfile>& profiles) {
  std::vector<double> counts, sims;
  for (const auto& p : profiles) {
    counts.push_back(static_cast<double>(p.train_count));
    sims.push_back(p.ambiguity);
  }
  Medians m{median(counts), median(sims)};
  for (auto& p : profiles) {
    p.high_frequency = static_cast<double>(p.train_count) >= m.train_count;
    p.high_similarity = p.ambiguity >= m.ambiguity;
  }
  return m;
}

std::vector<AttributeProfile> profile_attributes(
    const std::set<std::string>& attributes, const KnowledgeBase& kb,
    const std::vector<CleanTuple>& train, const Embedder& embedder) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : train) ++counts[t.attribute];
  std::vector<AttributeProfile> out;
  for (const auto& attr : attributes) {
    const auto sim = ambiguity_score(attr, kb, embedder);
    if (!sim) continue;
    AttributeProfile p;
    p.attribute = attr;
    p.train_count = counts[attr];
    p.ambiguity = *sim;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Example> restrict_examples(const std::vector<Example>& examples,
                                       const std::set<std::string>& attributes) {
  std::vector<Example> out;
  for (const auto& ex : examples) {
    if (attributes.count(ex.attribute)) out.push_back(ex);
  }
  return out;
}

std::vector<Prediction> restrict_predictions(
    const std::vector<Prediction>& predictions, const std::vector<Example>& kept) {
  std::unordered_map<std::size_t, bool> ids;
  for (const auto& ex : kept) ids.emplace(ex.id, true);
  std::vector<Prediction> out;
  for (const auto& p : predictions) {
    if (ids.count(p.example_id)) out.push_back(p);
  }
  return out;
}

EvalReport evaluate(const std::vector<Example>& golds,
                    const std::vector<Prediction>& predictions,
                    const KnowledgeBase& train_kb,
                    const std::vector<AttributeProfile>& profiles,
                    const ScoreOptions& options) {
  EvalReport r;
  r.overall = score(golds, predictions, options);

  std::map<std::string, std::vector<Example>> by_category;
  for (auto c : {ValueCategory::kSeenAttrSeenValue,
                 ValueCategory::kSeenAttrUnseenValue, ValueCategory::kUnseenAttr}) {
    by_category[to_string(c)];
  }
  for (const auto& ex : golds) {
    const auto c = categorize_example(ex, train_kb);
    if (c == ValueCategory::kSeenAttrSeenValue && !ex.value) ++r.null_gold_seen_value;
    by_category[to_string(c)].push_back(ex);
  }
  for (const auto& [name, exs] : by_category) {
    r.category_sizes[name] = exs.size();
    r.categories[name] = score(exs, restrict_predictions(predictions, exs), options);
  }

  std::map<std::string, std::string> bucket_of;
  std::vector<double> counts, sims;
  for (const auto& p : profiles) {
    bucket_of[p.attribute] = p.bucket();
    counts.push_back(static_cast<double>(p.train_count));
    sims.push_back(p.ambiguity);
  }
  r.medians = {median(counts), median(sims)};
  std::map<std::string, std::vector<Example>> by_bucket;
  for (const auto& ex : golds) {
    auto it = bucket_of.find(ex.attribute);
    if (it != bucket_of.end()) by_bucket[it->second].push_back(ex);
  }
  for (const auto& [name, exs] : by_bucket) {
    r.buckets[name] = score(exs, restrict_predictions(predictions, exs), options);
  }
  return r;
}

std::set<std::string> changed_attributes(const KnowledgeBase& a,
                                         const KnowledgeBase& b) {
  std::set<std::string> out;
  for (const auto& [attr, values] : a.entries()) {
    const auto* other = b.find(attr);
    if (!other || *other != values) out.insert(attr);
  }
  for (const auto& [attr, values] : b.entries()) {
    if (!a.find(attr)) out.insert(attr);
  }
  return out;
}

std::map<std::string, CategoryDelta> compare_kb(const EvalReport& base,
                                                const EvalReport& merged) {
  std::map<std::string, CategoryDelta> out;
  std::set<std::string> names;
  for (const auto& [n, s] : base.categories) names.insert(n);
  for (const auto& [n, s] : merged.categories) names.insert(n);
  const Score empty;
  for (const auto& n : names) {
    auto pick = [&](const EvalReport& r) -> const Score& {
      auto it = r.categories.find(n);
      return it == r.categories.end() ? empty : it->second;
    };
    const Score& a = pick(base);
    const Score& b = pick(merged);
    CategoryDelta d;
    d.micro = {b.micro.precision - a.micro.precision, b.micro.recall - a.micro.recall,
               b.micro.f1 - a.micro.f1};
    d.macro = {b.macro.precision - a.macro.precision, b.macro.recall - a.macro.recall,
               b.macro.f1 - a.macro.f1};
    d.examples = std::max(a.counts.examples, b.counts.examples);
    out[n] = d;
  }
  return out;
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

nlohmann::ordered_json counts_json(const Counts& c) {
  return {{"true_positives", c.true_positives},
          {"predicted", c.predicted},
          {"gold", c.gold},
          {"examples", c.examples}};
}

nlohmann::ordered_json score_json(const Score& s, bool per_attribute) {
  nlohmann::ordered_json j;
  j["counts"] = counts_json(s.counts);
  j["micro"] = prf_json(s.micro);
  j["macro"] = prf_json(s.macro);
  j["macro_attributes"] = s.macro_attributes;
  j["excluded_null_only_attributes"] = s.excluded_null_only;
  if (per_attribute) {
    auto& attrs = j["per_attribute"] = nlohmann::ordered_json::object();
    for (const auto& [name, a] : s.per_attribute) {
      attrs[name] = {{"counts", counts_json(a.counts)}, {"prf", prf_json(a.prf)}};
    }
  }
  return j;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

void print_row(std::ostream& out, const std::string& name, const Score& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-24s", name.c_str());
  out << buf << pct(s.macro.precision) << ' ' << pct(s.macro.recall) << ' '
      << pct(s.macro.f1) << "   " << pct(s.micro.precision) << ' '
      << pct(s.micro.recall) << ' ' << pct(s.micro.f1) << "  " << s.counts.examples
      << '\n';
}

}  // namespace

std::string score_to_json(const Score& s) { return score_json(s, true).dump(2); }

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["overall"] = score_json(r.overall, true);
  auto& cats = j["categories"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : r.categories) cats[name] = score_json(s, false);
  j["null_gold_filed_as_seen_value"] = r.null_gold_seen_value;
  auto& buckets = j["buckets"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : r.buckets) buckets[name] = score_json(s, false);
  j["medians"] = {{"train_count", r.medians.train_count},
                  {"similarity", r.medians.ambiguity}};
  return j.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

std::string delta_to_json(const std::map<std::string, CategoryDelta>& deltas) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, d] : deltas) {
    j[name] = {{"micro", prf_json(d.micro)},
               {"macro", prf_json(d.macro)},
               {"examples", d.examples}};
  }
  return j.dump(2);
}

void print_report(std::ostream& out, const EvalReport& r) {
  const std::string header =
      "                        macro-P macro-R macro-F1  micro-P micro-R "
      "micro-F1  examples\n";
  out << header;
  print_row(out, "overall", r.overall);
  out << "excluded NULL-only attributes: " << r.overall.excluded_null_only << "\n\n";
  out << header;
  for (const auto& [name, s] : r.categories) print_row(out, name, s);
  out << "\n" << header;
  for (const auto& [name, s] : r.buckets) print_row(out, name, s);
  out << "medians: train count " << r.medians.train_count << ", similarity "
      << r.medians.ambiguity << '\n';
}

void print_delta(std::ostream& out,
                 const std::map<std::string, CategoryDelta>& deltas) {
  out << "                        dmacro-P dmacro-R dmacro-F1 dmicro-P dmicro-R "
         "dmicro-F1\n";
  for (const auto& [name, d] : deltas) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-24s", name.c_str());
    out << buf << pct(d.macro.precision) << "   " << pct(d.macro.recall) << "   "
        << pct(d.macro.f1) << "    " << pct(d.micro.precision) << "   "
        << pct(d.micro.recall) << "   " << pct(d.micro.f1) << '\n';
  }
}

void write_profiles_csv(std::ostream& out,
                        const std::vector<AttributeProfile>& profiles) {
  out << "attribute,train_count,ambiguity,bucket\n";
  for (const auto& p : profiles) {
    std::string attr = p.attribute;
    if (attr.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : attr) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      attr = quoted + "\"";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", p.ambiguity);
    out << attr << ',' << p.train_count << ',' << buf << ',' << p.bucket() << '\n';
  }
}

}  // namespace avexp
