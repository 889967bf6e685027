// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dstl/grammar.hpp"
#include "dstl/syntax_tree.hpp"

namespace dstl {

/// Token universe of one grammar: its literals plus the Name, SchemaVar and
/// string-literal builtins. Symbol literals are matched longest-first.
struct LexSpec {
  std::set<std::string> keywords;        // identifier-shaped literals
  std::vector<std::string> symbols;      // non-identifier literals, longest first
};

LexSpec build_lexer(const Grammar& g);

/// Tokenizes text. Skips whitespace and // comments. Throws LexError.
std::vector<Token> lex(const LexSpec& spec, std::string_view text);

/// True when both texts lex to the same token sequence under spec.
bool token_equivalent(const LexSpec& spec, std::string_view a, std::string_view b);

}  // namespace dstl
