// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "dstl/grammar.hpp"
#include "dstl/lexer.hpp"
#include "dstl/syntax_tree.hpp"

namespace dstl {

namespace detail {
struct CompiledGrammar;
}

/// Chart parser interpreting a Grammar value at runtime. Recognition is
/// complete for context-free grammars; tree extraction is canonical:
/// earliest-declared alternative first, repetition greedy. Interface
/// nonterminals and groups are transparent in the resulting tree.
///
/// The Parser borrows g and facts; facts must come from analyze() on the
/// same Grammar instance.
class Parser {
public:
  Parser(const Grammar& g, const GrammarFacts& facts);
  ~Parser();
  Parser(const Parser&) = delete;
  Parser& operator=(const Parser&) = delete;

  SyntaxTree parse(std::string_view text, const std::string& start) const;
  bool recognizes(std::string_view text, const std::string& start) const;

  const LexSpec& lex_spec() const { return lex_; }
  const Grammar& grammar() const { return g_; }
  const GrammarFacts& facts() const { return facts_; }

private:
  const Grammar& g_;
  const GrammarFacts& facts_;
  LexSpec lex_;
  std::unique_ptr<detail::CompiledGrammar> compiled_;
};

}  // namespace dstl
