#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avexp/knowledge.hpp"
#include "avexp/spanlabel.hpp"

namespace avexp {

/// Dictionary matcher: the most frequent known value of the attribute that
/// occurs as a contiguous token sequence in the title. Ties follow KB order.
/// Returns nullopt (NULL) when nothing matches or the attribute is unknown.
std::optional<TokenList> dictionary_extract(const TokenList& title_tokens,
                                            const std::string& attribute,
                                            const KnowledgeBase& kb);

}  // namespace avexp
