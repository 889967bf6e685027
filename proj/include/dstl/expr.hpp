// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dstl/syntax_tree.hpp"

namespace dstl {

/// Value domain of where-block expressions.
struct ExprValue {
  enum class Kind { String, Bool, NodeRef };
  Kind kind = Kind::String;
  std::string str;
  bool boolean = false;
  int node_id = -1;

  static ExprValue string(std::string s);
  static ExprValue boolean_value(bool b);
  static ExprValue node(int id);
};

bool operator==(const ExprValue& a, const ExprValue& b);

struct Expr {
  enum class Kind { StringLit, VarRef, Call, Binary, Not, Paren };
  Kind kind = Kind::StringLit;
  std::string text;  // literal value / variable / method name / binary operator
  std::vector<Expr> children;  // Call: receiver? then args; Binary: lhs, rhs; Not/Paren: one
  bool has_receiver = false;   // Call only
  Span span;
};

bool expr_equal(const Expr& a, const Expr& b);
std::string render_expr(const Expr& e);

struct WhereBlock {
  struct Assignment {
    std::string var;
    Expr value;
    Span span;
  };
  std::vector<Assignment> assignments;
  std::optional<Expr> constraint;
};

bool where_equal(const WhereBlock& a, const WhereBlock& b);

/// An injective node binding plus the schema-variable environment.
/// Element variables map to NodeRef values, name variables to strings.
struct Binding {
  std::map<int, int> node_binding;  // pattern node id -> model node id
  std::map<std::string, ExprValue> var_env;
};

bool operator==(const Binding& a, const Binding& b);
bool operator<(const Binding& a, const Binding& b);

struct EvalContext {
  const SyntaxTree* model = nullptr;  // resolves NodeRef values for deepEquals
};

/// Lowers a parsed Expression/BooleanExpression subtree.
Expr lower_expr(const Node& n);

/// Lowers a parsed Where subtree.
WhereBlock lower_where(const Node& where_node);

/// Strict evaluation. Throws EvalError on unbound variables, type
/// mismatches and unknown methods.
ExprValue eval_expr(const Expr& e, const Binding& env, const EvalContext& ctx);

/// Executes assignments in order (each may read earlier ones), then the
/// constraint under the extended environment; an absent constraint is true.
/// The input binding is not modified.
std::pair<Binding, bool> run_where(const WhereBlock& w, const Binding& env,
                                   const EvalContext& ctx);

}  // namespace dstl
