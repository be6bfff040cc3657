#include "avexp/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace avexp {

namespace {

struct NamedEntity {
  std::string_view name;
  std::string_view utf8;
};

constexpr NamedEntity kNamedEntities[] = {
#include "html_entities.inc"
};

std::optional<std::string_view> lookup_entity(std::string_view name) {
  auto it = std::lower_bound(
      std::begin(kNamedEntities), std::end(kNamedEntities), name,
      [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it == std::end(kNamedEntities) || it->name != name) return std::nullopt;
  return it->utf8;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_ascii_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex_digit(unsigned char c) {
  return is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Decodes "&#...;" starting at `amp`. Returns consumed length, 0 if invalid.
std::size_t decode_numeric(std::string_view s, std::size_t amp,
                           std::string& out) {
  std::size_t i = amp + 2;
  bool hex = false;
  if (i < s.size() && (s[i] == 'x' || s[i] == 'X')) {
    hex = true;
    ++i;
  }
  const std::size_t digits_begin = i;
  std::uint64_t cp = 0;
  while (i < s.size() && (hex ? is_hex_digit(s[i]) : is_ascii_digit(s[i]))) {
    const unsigned char c = s[i];
    const unsigned d = is_ascii_digit(c) ? c - '0' : (c | 0x20) - 'a' + 10;
    cp = cp * (hex ? 16 : 10) + d;
    if (cp > 0x10FFFF) return 0;
    ++i;
  }
  if (i == digits_begin || i >= s.size() || s[i] != ';') return 0;
  if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  append_utf8(out, static_cast<char32_t>(cp));
  return i + 1 - amp;
}

// Byte length of a whitespace character at s[i], 0 if none. Besides ASCII
// whitespace this covers NBSP and the Unicode space separators U+2000..U+200A,
// U+202F, U+205F and U+3000.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
      c == '\v') {
    return 1;
  }
  auto at = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (c == 0xC2 && at(1) == 0xA0) return 2;
  if (c == 0xE2 && at(1) == 0x80 && (at(2) <= 0x8A || at(2) == 0xAF) &&
      at(2) >= 0x80) {
    return 3;
  }
  if (c == 0xE2 && at(1) == 0x81 && at(2) == 0x9F) return 3;
  if (c == 0xE3 && at(1) == 0x80 && at(2) == 0x80) return 3;
  return 0;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size();) {
    if (const std::size_t w = whitespace_len(s, i)) {
      pending_space = true;
      i += w;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += s[i++];
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && s[b] == ' ') ++b;
  while (e > b && s[e - 1] == ' ') --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = kDigits[v & 0xF];
  return out;
}

std::string decode_html_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '#') {
      if (const std::size_t n = decode_numeric(s, i, out)) {
        i += n;
        continue;
      }
    } else {
      std::size_t j = i + 1;
      while (j < s.size() && (is_ascii_alpha(s[j]) || is_ascii_digit(s[j]))) {
        ++j;
      }
      if (j > i + 1 && j < s.size() && s[j] == ';') {
        if (auto utf8 = lookup_entity(s.substr(i + 1, j - i - 1))) {
          out += *utf8;
          i = j + 1;
          continue;
        }
      }
    }
    out += s[i++];
  }
  return out;
}

std::string clean_text(std::string_view raw) {
  // Terminates: a pass that changes anything either removes an '&' or, for
  // references that decode to '&', shortens the text.
  std::string text(raw);
  for (;;) {
    std::string next = decode_html_entities(text);
    if (next == text) break;
    text = std::move(next);
  }
  return trim(collapse_whitespace(text));
}

std::string normalize_attribute(std::string_view attr) {
  std::string spaced;
  spaced.reserve(attr.size() + 8);
  for (std::size_t i = 0; i < attr.size(); ++i) {
    const auto c = static_cast<unsigned char>(attr[i]);
    if (i > 0) {
      const auto p = static_cast<unsigned char>(attr[i - 1]);
      if ((is_ascii_alpha(p) && is_ascii_digit(c)) ||
          (is_ascii_digit(p) && is_ascii_alpha(c))) {
        spaced += ' ';
      }
    }
    spaced += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32)
                                     : static_cast<char>(c);
  }
  // Strip trailing colons, and any space they expose, until stable.
  for (;;) {
    const std::size_t before = spaced.size();
    while (!spaced.empty() && spaced.back() == ':') spaced.pop_back();
    spaced = trim(spaced);
    if (spaced.size() == before) break;
  }
  return spaced;
}

std::optional<CleanTuple> clean_tuple(const RawTuple& raw) {
  CleanTuple t;
  t.title = clean_text(raw.title);
  t.attribute = normalize_attribute(clean_text(raw.attribute));
  if (raw.value != kRawNullLiteral) {
    t.value = clean_text(raw.value);
    if (t.value->empty()) return std::nullopt;
  }
  if (t.title.empty() || t.attribute.empty()) return std::nullopt;
  return t;
}

std::vector<CleanTuple> dedup(const std::vector<CleanTuple>& tuples) {
  struct Key {
    const CleanTuple* t;
    bool operator==(const Key& o) const { return *t == *o.t; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = fnv1a(k.t->title);
      h = fnv1a("\x1f", h);
      h = fnv1a(k.t->attribute, h);
      h = fnv1a(k.t->value ? "\x1fv" : "\x1fn", h);
      if (k.t->value) h = fnv1a(*k.t->value, h);
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_set<Key, KeyHash> seen;
  std::vector<CleanTuple> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) {
    if (seen.insert(Key{&t}).second) out.push_back(t);
  }
  return out;
}

CleanResult clean_corpus(const std::vector<RawTuple>& raw) {
  CleanResult result;
  result.report.input = raw.size();
  std::vector<CleanTuple> cleaned;
  cleaned.reserve(raw.size());
  for (const auto& r : raw) {
    auto t = clean_tuple(r);
    if (!t) {
      ++result.report.dropped_empty;
      continue;
    }
    if (t->title != r.title) ++result.report.changed_titles;
    if (t->attribute != r.attribute) ++result.report.changed_attributes;
    if (t->value && *t->value != r.value) ++result.report.changed_values;
    cleaned.push_back(std::move(*t));
  }
  result.tuples = dedup(cleaned);
  result.report.duplicates = cleaned.size() - result.tuples.size();
  result.report.output = result.tuples.size();
  return result;
}

SplitDataset split(const std::vector<CleanTuple>& tuples, std::uint64_t seed,
                   bool stratified) {
  const std::size_t n = tuples.size();
  if (n < 10) {
    throw DataError("split needs at least 10 tuples, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitDataset out;
  out.seed = seed;
  out.stratified = stratified;
  const std::size_t n_dev = (n + 5) / 10;
  const std::size_t n_test = (2 * n + 5) / 10;
  const std::size_t n_train = n - n_dev - n_test;
  std::vector<CleanTuple>* parts[3] = {&out.train, &out.dev, &out.test};
  if (!stratified) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t p = k < n_train ? 0 : k < n_train + n_dev ? 1 : 2;
      parts[p]->push_back(tuples[order[k]]);
    }
    return out;
  }

  // Group by attribute, groups ordered by first appearance in the shuffle.
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t idx : order) {
    group_of.emplace(tuples[idx].attribute, group_of.size());
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return group_of.at(tuples[a].attribute) < group_of.at(tuples[b].attribute);
  });
  // Deal each position to the part furthest behind its quota, so every
  // attribute is spread 7:1:2 and the totals match the unstratified split.
  const std::size_t quota[3] = {n_train, n_dev, n_test};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = 0;
    long long best_deficit = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      const long long deficit = static_cast<long long>(quota[p] * (k + 1)) -
                                static_cast<long long>(parts[p]->size() * n);
      if (p == 0 || deficit > best_deficit) {
        best = p;
        best_deficit = deficit;
      }
    }
    parts[best]->push_back(tuples[order[k]]);
  }
  return out;
}

CorpusStats compute_stats(const std::vector<CleanTuple>& tuples) {
  CorpusStats s;
  std::set<std::string> attrs, values;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& t : tuples) {
    ++s.tuples;
    attrs.insert(t.attribute);
    if (t.is_null()) {
      ++s.null_tuples;
      continue;
    }
    values.insert(*t.value);
    pairs.emplace(t.attribute, *t.value);
  }
  s.attributes = attrs.size();
  s.values = values.size();
  s.attribute_value_pairs = pairs.size();
  return s;
}

std::vector<RawTuple> read_raw(std::istream& in) {
  std::vector<RawTuple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      }
      RawTuple r;
      for (auto [field, key] : {std::pair{&r.title, "title"},
                                {&r.attribute, "attribute"},
                                {&r.value, "value"}}) {
        auto it = j.find(key);
        if (it == j.end()) {
          throw DataError("line " + std::to_string(lineno) +
                          ": missing field '" + key + "'");
        }
        *field = it->is_null() ? std::string(kRawNullLiteral)
                               : it->get<std::string>();
      }
      out.push_back(std::move(r));
      continue;
    }
    const char sep = line.find('\x01') != std::string::npos ? '\x01' : '\t';
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(sep, start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 3) {
      throw DataError("line " + std::to_string(lineno) + ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    }
    if (lineno == 1 && fields[0] == "title" && fields[1] == "attribute" &&
        fields[2] == "value") {
      continue;
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw DataError("line " + std::to_string(lineno) + ": empty field");
    }
    out.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  return out;
}

std::vector<RawTuple> read_raw_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_raw(in);
}

void write_clean_jsonl(std::ostream& out, const std::vector<CleanTuple>& tuples) {
  for (const auto& t : tuples) {
    nlohmann::ordered_json j;
    j["title"] = t.title;
    j["attribute"] = t.attribute;
    j["value"] = t.value ? nlohmann::ordered_json(*t.value) : nullptr;
    out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
}

std::vector<CleanTuple> read_clean_jsonl(std::istream& in) {
  std::vector<CleanTuple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CleanTuple t;
      t.title = j.at("title").get<std::string>();
      t.attribute = j.at("attribute").get<std::string>();
      if (!j.at("value").is_null()) t.value = j.at("value").get<std::string>();
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_clean_file(const std::string& path,
                      const std::vector<CleanTuple>& tuples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_clean_jsonl(out, tuples);
}

std::vector<CleanTuple> read_clean_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_clean_jsonl(in);
}

}  // namespace avexp
