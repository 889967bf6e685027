// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dstl/source.hpp"

namespace dstl {

enum class Card { One, Opt, Star, Plus };

/// Right-hand side expression of a production.
///
/// Normal forms kept by the parser and the derivation:
///   - a production body is always an Alternative whose children are Sequences
///   - a Group's single child is an Alternative in the same normal form
struct RhsExpr {
  enum class Kind { Sequence, Alternative, Terminal, OptionalKeyword, NontermRef, Group };

  Kind kind = Kind::Sequence;
  std::vector<RhsExpr> children;  // Sequence: elements; Alternative: sequences; Group: one Alternative
  std::string text;               // Terminal and OptionalKeyword: the literal text
  std::string target;             // NontermRef
  std::string label;              // NontermRef, may be empty
  Card card = Card::One;          // NontermRef and Group
  bool bracketed = true;          // OptionalKeyword surface form: ["kw"]? vs "kw"?
  Span span;

  static RhsExpr sequence(std::vector<RhsExpr> elems);
  static RhsExpr alternative(std::vector<RhsExpr> seqs);
  static RhsExpr terminal(std::string text);
  static RhsExpr optional_keyword(std::string text, bool bracketed = true);
  static RhsExpr ref(std::string target, Card card = Card::One, std::string label = "");
  static RhsExpr group(RhsExpr alt, Card card);
};

bool structurally_equal(const RhsExpr& a, const RhsExpr& b);

enum class ProdKind { Standard, Interface, LexicalBuiltin };

struct Production {
  std::string name;
  ProdKind kind = ProdKind::Standard;
  // Standard: implemented interfaces. Interface: extended interfaces.
  std::vector<std::string> implements_list;
  std::optional<RhsExpr> body;  // absent for Interface and LexicalBuiltin
  std::string origin_grammar;
  Span span;
};

bool structurally_equal(const Production& a, const Production& b);

struct Grammar {
  std::string name;
  std::vector<std::string> extends_names;
  std::vector<Production> productions;

  const Production* find(std::string_view prod_name) const;
};

bool structurally_equal(const Grammar& a, const Grammar& b);

/// Lexical nonterminals every grammar may reference without defining them.
/// Only Name is materialized as a production (by the implicit grammar Common).
bool is_builtin_lexical_name(std::string_view name);

/// The implicit supergrammar supplying the Name builtin.
Grammar builtin_common();

/// Parses grammar source text. Throws GrammarError with line:col on
/// syntax errors and duplicate production names.
Grammar parse_grammar(std::string_view text);

/// Canonical single-line-per-production rendering. Lexical builtins have no
/// surface form; their presence is expressed as `extends Common` instead.
std::string unparse_grammar(const Grammar& g);

/// Resolves the inheritance closure into a single grammar. Supergrammar
/// productions come first; a production in a subgrammar overrides a
/// same-named inherited one in place. "Common" falls back to the builtin
/// grammar when absent from the registry.
Grammar flatten_inheritance(const Grammar& g, const std::map<std::string, Grammar>& registry);

/// Structural checks on a flattened grammar. Returns human-readable
/// problems; empty means valid.
std::vector<std::string> validate(const Grammar& g);

struct GrammarFacts {
  std::set<std::string> nullable;
  // optional keyword text -> productions whose bodies contain it
  std::map<std::string, std::set<std::string>> optional_keywords;
  std::vector<std::string> keyword_order;  // first-occurrence order
  // interface name -> directly implementing/extending productions, declaration order
  std::map<std::string, std::vector<std::string>> implementors;
  // any nonterminal -> the standard productions it can denote
  std::map<std::string, std::set<std::string>> concrete;
  // slot key per NontermRef occurrence (label, or Target / Target#k for
  // unlabeled lexical refs, counted per top-level alternative)
  std::map<const RhsExpr*, std::string> ref_slots;
  // all optional keywords per production, body-wide
  std::map<std::string, std::set<std::string>> keywords_of;

  bool is_nullable(const std::string& n) const { return nullable.count(n) != 0; }
  const std::set<std::string>& concrete_types(const std::string& n) const;
};

/// Computes facts over a flattened, valid grammar. Throws GrammarError if
/// validate(g) reports problems.
GrammarFacts analyze(const Grammar& g);

}  // namespace dstl
