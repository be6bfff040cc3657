#include "avexp/tokenize.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace avexp {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

// Non-ASCII bytes are treated as word characters.
bool is_word(unsigned char c) { return c >= 0x80 || is_alnum(c); }

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      flush();
    } else if (is_word(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32)
                                        : static_cast<char>(c);
    } else if ((c == '-' || c == '.') && !current.empty() &&
               is_alnum(static_cast<unsigned char>(text[i - 1])) &&
               i + 1 < text.size() &&
               is_alnum(static_cast<unsigned char>(text[i + 1]))) {
      current += static_cast<char>(c);
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

std::string detokenize(const TokenList& tokens) { return join(tokens, " "); }

Vocabulary::Vocabulary() {
  for (auto s : {kPadToken, kClsToken, kSepToken, kSeenToken, kUnseenToken,
                 kUnkToken}) {
    add(s);
  }
}

TokenId Vocabulary::add(std::string_view surface) {
  if (auto it = ids_.find(std::string(surface)); it != ids_.end()) {
    return it->second;
  }
  if (frozen_) throw UsageError("cannot add to a frozen vocabulary");
  const auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  ids_.emplace(std::string(surface), id);
  return id;
}

TokenId Vocabulary::id(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view surface) const {
  return ids_.count(std::string(surface)) > 0;
}

std::vector<TokenId> Vocabulary::encode(const TokenList& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::ostringstream ss;
  write(ss);
  return fnv1a(ss.str());
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    out << i << '\t' << surfaces_[i] << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary v;
  std::string line;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("vocabulary: missing tab");
    const std::size_t id = std::stoul(line.substr(0, tab));
    const std::string surface = line.substr(tab + 1);
    if (id != expected) throw DataError("vocabulary: ids are not dense");
    if (id < kNumReserved) {
      if (v.surface(static_cast<TokenId>(id)) != surface) {
        throw DataError("vocabulary: reserved id " + std::to_string(id) +
                        " is not " + v.surface(static_cast<TokenId>(id)));
      }
    } else if (v.add(surface) != id) {
      throw DataError("vocabulary: duplicate surface " + surface);
    }
    ++expected;
  }
  v.freeze();
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write(out);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read(in);
}

Vocabulary build_vocab(const std::map<std::string, std::size_t>& counts,
                       std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [surface, n] : counts) {
    if (n >= min_count && n > 0) kept.emplace_back(surface, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  Vocabulary v;
  for (const auto& [surface, n] : kept) v.add(surface);
  v.freeze();
  return v;
}

Vocabulary build_vocab(const std::vector<TokenList>& corpus,
                       std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& tokens : corpus) {
    for (const auto& t : tokens) ++counts[t];
  }
  return build_vocab(counts, min_count);
}

}  // namespace avexp
