#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avexp/common.hpp"

namespace avexp {

using TokenId = std::uint32_t;

// Reserved ids. The first five are fixed by the input layout; UNK follows.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kClsId = 1;
inline constexpr TokenId kSepId = 2;
inline constexpr TokenId kSeenId = 3;
inline constexpr TokenId kUnseenId = 4;
inline constexpr TokenId kUnkId = 5;
inline constexpr TokenId kNumReserved = 6;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kSeenToken = "[SEEN]";
inline constexpr std::string_view kUnseenToken = "[UNSEEN]";
inline constexpr std::string_view kUnkToken = "[UNK]";

/// Lower-cases (ASCII), splits on whitespace and detaches ASCII punctuation
/// as single-character tokens. '-' and '.' stay inside a token when both
/// neighbours are alphanumeric, so "3.2v" and "a-b" survive intact.
/// Bracketed special surfaces can never be produced.
TokenList tokenize(std::string_view text);

/// Joins tokens with single spaces.
std::string detokenize(const TokenList& tokens);

/// Dense token <-> id map. Reserved tokens occupy ids 0..5. After freeze()
/// no surfaces can be added; unknown lookups always yield kUnkId.
class Vocabulary {
 public:
  Vocabulary();

  TokenId add(std::string_view surface);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  TokenId id(std::string_view surface) const;
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  std::size_t size() const { return surfaces_.size(); }
  bool contains(std::string_view surface) const;

  std::vector<TokenId> encode(const TokenList& tokens) const;

  /// FNV-1a over the serialized form; identifies the vocabulary in model files.
  std::uint64_t fingerprint() const;

  /// `id<TAB>surface` per line, ids ascending.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
  bool frozen_ = false;
};

/// Builds a frozen vocabulary from token counts: tokens with count >=
/// min_count, ordered by count descending then surface ascending.
Vocabulary build_vocab(const std::map<std::string, std::size_t>& counts,
                       std::size_t min_count = 1);

/// Convenience overload that counts the tokens itself.
Vocabulary build_vocab(const std::vector<TokenList>& corpus,
                       std::size_t min_count = 1);

}  // namespace avexp
