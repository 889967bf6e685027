// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dstl/derive.hpp"
#include "dstl/expr.hpp"
#include "dstl/syntax_tree.hpp"

namespace dstl {

enum class NameConstraintKind { Literal, Var, Wildcard };

struct NameConstraint {
  NameConstraintKind kind = NameConstraintKind::Wildcard;
  std::string text;  // literal text or $variable
  Span span;
};

bool operator==(const NameConstraint& a, const NameConstraint& b);

enum class KeywordReq { Required, Forbidden };

/// One element of a pattern. Concrete nodes carry constraints mirroring the
/// stated syntax; omitted parts are unconstrained. Black box binds an
/// arbitrary element of the type, white box adds inner syntax, anonymous is
/// the non-binding $_ form.
struct PatternNode {
  enum class Form { Concrete, BlackBox, WhiteBox, Anonymous };

  int id = -1;
  std::string type;  // nonterminal of the modeling language
  Form form = Form::Concrete;
  std::string var;  // $-prefixed; empty unless BlackBox/WhiteBox
  // slot key -> constraint, in syntax order; repeated slot keys address
  // successive token occurrences
  std::vector<std::pair<std::string, NameConstraint>> name_constraints;
  std::map<std::string, KeywordReq> keyword_constraints;
  std::vector<int> children;
  int parent = -1;
  std::string slot;  // slot under parent; empty for roots
  bool to_delete = false;
  Span span;
};

struct PatternGraph {
  std::vector<PatternNode> nodes;  // index == id
  std::vector<int> roots;

  PatternNode& node(int id) { return nodes[static_cast<size_t>(id)]; }
  const PatternNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }
};

/// A negative application condition: its own pattern graph, anchored either
/// at a bound lhs node (child position) or at the rule top level.
struct Nac {
  PatternGraph graph;
  int anchor = -1;  // lhs node id, -1 for top level
  std::string slot;
  Span span;
};

/// An instantiation template kept as the parsed transformation-language
/// subtree it came from.
struct Template {
  std::string type;  // created element's nonterminal in L
  std::shared_ptr<const Node> syntax;
};

struct Edit {
  enum class Kind { Replace, KeywordAdd, KeywordRemove, NameReplace };

  Kind kind = Kind::Replace;
  int anchor = -1;    // Replace: parent lhs node (-1 = top level); others: the node itself
  std::string slot;   // Replace: target child slot under the anchor
  int lhs_node = -1;  // Replace: deleted lhs node id, -1 for pure creation
  std::optional<Template> rhs;  // Replace: absent for pure deletion
  std::string keyword;          // KeywordAdd / KeywordRemove
  std::string name_slot;        // NameReplace
  int name_occurrence = 0;      // NameReplace: occurrence among same-slot names
  NameConstraint name_from, name_to;  // NameReplace
  Span span;
};

struct Violation {
  std::string condition;  // CC1..CC6
  std::string message;
  Span span;
};

struct RuleIR {
  PatternGraph lhs;
  std::vector<Nac> nacs;
  std::vector<Edit> edits;  // document order
  WhereBlock where;
  bool has_where = false;

  // structural problems found while lowering, reported by check_conditions
  std::vector<Violation> markers;

  // original concrete syntax, for re-rendering
  std::vector<std::shared_ptr<const Node>> element_syntax;
  std::shared_ptr<const Node> where_syntax;

  // borrowed from the DerivedGrammar passed to lower_to_ir
  const DerivedGrammar* dstl = nullptr;

  const Grammar& lang() const { return dstl->source_language; }
  const GrammarFacts& lang_facts() const { return dstl->source_facts; }
};

/// Lowers a tree parsed with start=TFRule into the explicit rule
/// representation. Total on parseable rules; malformations surface through
/// check_conditions. The returned IR borrows dstl.
RuleIR lower_to_ir(const SyntaxTree& rule_tree, const DerivedGrammar& dstl);

/// Context conditions over a lowered rule. Empty means valid:
///   CC1 schema variables are bound at most once (name variables may repeat)
///   CC2 variables in replacement content are bound by the pattern or assigned
///   CC3 where-block variables exist per their role
///   CC4 no negative elements inside replacement content
///   CC5 no nested negative elements
///   CC6 no modification inside a negative element
std::vector<Violation> check_conditions(const RuleIR& ir);

/// Renders the rule back to integrated concrete syntax.
std::string render_rule(const RuleIR& ir);

/// Structural equality of two lowered rules, ignoring spans.
bool ir_equal(const RuleIR& a, const RuleIR& b);

/// Variables bound by the positive pattern: element variables of the lhs
/// graph and name variables from lhs constraints. Used by matching and the
/// condition checks.
std::set<std::string> lhs_element_vars(const RuleIR& ir);
std::set<std::string> lhs_name_vars(const RuleIR& ir);

/// Variables occurring in replacement content (templates, name-replace
/// targets), excluding $_.
std::set<std::string> rhs_template_vars(const RuleIR& ir);

}  // namespace dstl
