#include "avexp/baseline.hpp"

#include <algorithm>

namespace avexp {

std::optional<TokenList> dictionary_extract(const TokenList& title_tokens,
                                            const std::string& attribute,
                                            const KnowledgeBase& kb) {
  const auto* values = kb.find(attribute);
  if (!values) return std::nullopt;
  // KB order is count-descending, so the first hit is the answer.
  for (const auto& v : *values) {
    if (std::search(title_tokens.begin(), title_tokens.end(), v.tokens.begin(),
                    v.tokens.end()) != title_tokens.end()) {
      return v.tokens;
    }
  }
  return std::nullopt;
}

}  // namespace avexp
