// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dstl/expr.hpp"
#include "dstl/rule_ir.hpp"
#include "dstl/syntax_tree.hpp"

namespace dstl {

/// One primitive matching step. A node is bound by exactly one
/// EnumerateByType or ExtendChild step before any check referencing it.
struct PlanStep {
  enum class Kind {
    EnumerateByType,
    ExtendChild,
    CheckInjective,
    CheckKeyword,
    CheckName,
    CheckNameVarEquality
  };

  Kind kind;
  int node = -1;     // pattern node id
  std::string type;  // EnumerateByType
  int parent = -1;   // ExtendChild; -1 means the NAC anchor
  std::string slot;
  std::string keyword;  // CheckKeyword
  KeywordReq req = KeywordReq::Required;
  std::string name_slot;  // CheckName / CheckNameVarEquality
  int occurrence = 0;
  NameConstraint constraint;
};

struct SearchPlan {
  std::vector<PlanStep> steps;
  std::vector<std::vector<PlanStep>> nac_plans;  // parallel to RuleIR::nacs
};

struct Match {
  Binding binding;
};

/// Most-constrained-first ordering (name and keyword constraints plus child
/// count), parents always before children, ties by declaration order.
SearchPlan compile_search_plan(const RuleIR& ir);

/// All injective matches of the rule's lhs in the model, NAC-filtered and
/// where-filtered, ordered by the document positions of the bound nodes
/// along the plan. The model is not modified. Returned bindings include
/// where-block assignments.
std::vector<Match> find_matches(const SearchPlan& plan, const SyntaxTree& model,
                                const RuleIR& ir);

/// Applies the rule's edits for one match. Deletions run first, then
/// replacements and creations, then keyword and name edits. Bound subtrees
/// referenced on the right-hand side are copied from the unmodified input.
/// Returns a new tree; the input is untouched.
SyntaxTree apply_match(const RuleIR& ir, const SyntaxTree& model, const Match& m);

enum class ApplyMode { Once, Exhaustive };

struct ApplyResult {
  SyntaxTree model;
  int applications = 0;
};

/// Once: apply the first match if any. Exhaustive: recompute matches and
/// apply the first until none remain; throws GuardError past max_iter.
ApplyResult apply(const RuleIR& ir, const SyntaxTree& model, ApplyMode mode,
                  int max_iter = 10000);

/// Test oracle: enumerates every injective typed assignment directly and
/// checks all constraints, NACs and the where block. Independent of the
/// search-plan machinery. Throws Error when the model exceeds node_budget.
std::vector<Match> brute_force_matches(const RuleIR& ir, const SyntaxTree& model,
                                       int node_budget = 200);

}  // namespace dstl
