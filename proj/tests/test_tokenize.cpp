#include <doctest.h>

#include <sstream>

#include "avexp/tokenize.hpp"

using namespace avexp;

TEST_CASE("tokenize splits punctuation and keeps inner dots and hyphens") {
  CHECK(tokenize("100ah, 200ah") == TokenList{"100ah", ",", "200ah"});
  CHECK(tokenize("Golf PU Putter") == TokenList{"golf", "pu", "putter"});
  CHECK(tokenize("3.2V a-b") == TokenList{"3.2v", "a-b"});
  CHECK(tokenize("end. -x") == TokenList{"end", ".", "-", "x"});
  CHECK(tokenize("  ") == TokenList{});
  CHECK(tokenize("[PAD]") == TokenList{"[", "pad", "]"});
  CHECK(tokenize("caf\xc3\xa9!") == TokenList{"caf\xc3\xa9", "!"});
}

TEST_CASE("detokenize then tokenize is stable") {
  for (const char* s : {"Nike& Adidas", "a,b,,c", "6.5 inch", "x--y", "(eu 39-42)"}) {
    const auto t = tokenize(s);
    CHECK(tokenize(detokenize(t)) == t);
  }
}

TEST_CASE("reserved ids") {
  Vocabulary v;
  CHECK(v.size() == kNumReserved);
  CHECK(v.id(kPadToken) == kPadId);
  CHECK(v.id(kClsToken) == kClsId);
  CHECK(v.id(kSepToken) == kSepId);
  CHECK(v.id(kSeenToken) == kSeenId);
  CHECK(v.id(kUnseenToken) == kUnseenId);
  CHECK(v.id(kUnkToken) == kUnkId);
}

TEST_CASE("build_vocab orders by count then surface and maps unknowns to UNK") {
  const auto v = build_vocab(std::vector<TokenList>{{"b", "a", "b"}, {"c", "a", "b"}});
  CHECK(v.frozen());
  CHECK(v.id("b") == kNumReserved);
  CHECK(v.id("a") == kNumReserved + 1);
  CHECK(v.id("c") == kNumReserved + 2);
  CHECK(v.id("zzz") == kUnkId);
  CHECK_THROWS(Vocabulary(v).add("new"));
  const auto pruned = build_vocab(std::vector<TokenList>{{"b", "a", "b"}, {"c", "a", "b"}}, 2);
  CHECK(pruned.id("c") == kUnkId);
}

TEST_CASE("vocabulary ids are stable across rebuilds and round trips") {
  const std::vector<TokenList> corpus = {{"x", "y"}, {"y", "z", "z"}, {"w"}};
  const auto a = build_vocab(corpus);
  const auto b = build_vocab(corpus);
  CHECK(a.fingerprint() == b.fingerprint());
  std::stringstream ss;
  a.write(ss);
  const auto c = Vocabulary::read(ss);
  CHECK(c.size() == a.size());
  for (TokenId i = 0; i < a.size(); ++i) CHECK(c.surface(i) == a.surface(i));
  CHECK(c.fingerprint() == a.fingerprint());
  std::istringstream bad("0\t[PAD]\n2\tx\n");
  CHECK_THROWS(Vocabulary::read(bad));
}
