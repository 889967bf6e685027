// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "dstl/grammar.hpp"

namespace dstl {

/// A transformation-language grammar derived from a modeling language,
/// together with per-production provenance and the flattened source
/// language it was derived from.
struct DerivedGrammar {
  struct Provenance {
    std::string rule;    // 1a 1b 1c 2a 2b 3a 3b 4a 4b 4c 5 tfcommons
    std::string source;  // nonterminal or keyword of L, empty for tfcommons/5
  };

  Grammar grammar;  // flattened, self-contained (TFCommons embedded)
  std::map<std::string, Provenance> provenance;
  Grammar source_language;  // flattened L
  GrammarFacts source_facts;
};

/// The common base grammar embedded into every derived language
/// (identifier replacement, schema variables, where block, expressions).
const Grammar& tfcommons_grammar();

/// Interface-nonterminal name for an optional keyword: words are
/// capitalized, known symbols use a fixed table (+ - * /), anything else
/// becomes Sym<hex>. A clash with a taken name appends "Keyword" once.
std::string keyword_interface_name(const std::string& keyword);

/// Stable keyword -> interface-name map for a grammar, clash-resolved
/// against its nonterminal names. Throws DeriveError when unresolvable.
std::map<std::string, std::string> keyword_names(const Grammar& g, const GrammarFacts& facts);

// Derivation steps over a flattened modeling-language grammar. Each returns
// the productions it contributes, in emission order.
std::vector<Production> derive_interface_layer(const Grammar& g, const GrammarFacts& facts);
std::vector<Production> derive_replacements(const Grammar& g, const GrammarFacts& facts);
std::vector<Production> derive_negations(const Grammar& g, const GrammarFacts& facts);
std::vector<Production> derive_patterns(const Grammar& g, const GrammarFacts& facts);
Production derive_tfrule(const Grammar& g, const GrammarFacts& facts);

/// Runs the whole derivation. Flattens g first (registry resolves
/// supergrammars). Throws DeriveError on an empty TFRule alternative or
/// unresolvable name clashes.
DerivedGrammar derive_dstl(const Grammar& g,
                           const std::map<std::string, Grammar>& registry = {});

/// One line per production: name<TAB>rule<TAB>source.
std::string provenance_sidecar(const DerivedGrammar& d);
std::map<std::string, DerivedGrammar::Provenance> parse_provenance(std::string_view text);

}  // namespace dstl
