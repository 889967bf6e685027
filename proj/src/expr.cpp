// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/expr.hpp"

#include <cctype>

namespace dstl {

ExprValue ExprValue::string(std::string s) {
  ExprValue v;
  v.kind = Kind::String;
  v.str = std::move(s);
  return v;
}

ExprValue ExprValue::boolean_value(bool b) {
  ExprValue v;
  v.kind = Kind::Bool;
  v.boolean = b;
  return v;
}

ExprValue ExprValue::node(int id) {
  ExprValue v;
  v.kind = Kind::NodeRef;
  v.node_id = id;
  return v;
}

bool operator==(const ExprValue& a, const ExprValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprValue::Kind::String: return a.str == b.str;
    case ExprValue::Kind::Bool: return a.boolean == b.boolean;
    case ExprValue::Kind::NodeRef: return a.node_id == b.node_id;
  }
  return false;
}

bool operator==(const Binding& a, const Binding& b) {
  return a.node_binding == b.node_binding && a.var_env == b.var_env;
}

namespace {

std::string value_key(const ExprValue& v) {
  switch (v.kind) {
    case ExprValue::Kind::String: return "s:" + v.str;
    case ExprValue::Kind::Bool: return v.boolean ? "b:1" : "b:0";
    case ExprValue::Kind::NodeRef: return "n:" + std::to_string(v.node_id);
  }
  return "";
}

}  // namespace

bool operator<(const Binding& a, const Binding& b) {
  if (a.node_binding != b.node_binding) return a.node_binding < b.node_binding;
  auto ia = a.var_env.begin();
  auto ib = b.var_env.begin();
  for (; ia != a.var_env.end() && ib != b.var_env.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
    std::string ka = value_key(ia->second), kb = value_key(ib->second);
    if (ka != kb) return ka < kb;
  }
  return a.var_env.size() < b.var_env.size();
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.has_receiver != b.has_receiver) return false;
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!expr_equal(a.children[i], b.children[i])) return false;
  return true;
}

std::string render_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::StringLit: {
      std::string out = "\"";
      for (char c : e.text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      return out + "\"";
    }
    case Expr::Kind::VarRef:
      return e.text;
    case Expr::Kind::Call: {
      std::string out;
      size_t arg0 = 0;
      if (e.has_receiver) {
        out += render_expr(e.children[0]) + ".";
        arg0 = 1;
      }
      out += e.text + "(";
      for (size_t i = arg0; i < e.children.size(); ++i) {
        if (i > arg0) out += ", ";
        out += render_expr(e.children[i]);
      }
      return out + ")";
    }
    case Expr::Kind::Binary:
      return render_expr(e.children[0]) + " " + e.text + " " + render_expr(e.children[1]);
    case Expr::Kind::Not:
      return "!" + render_expr(e.children[0]);
    case Expr::Kind::Paren:
      return "(" + render_expr(e.children[0]) + ")";
  }
  return "";
}

bool where_equal(const WhereBlock& a, const WhereBlock& b) {
  if (a.assignments.size() != b.assignments.size()) return false;
  for (size_t i = 0; i < a.assignments.size(); ++i) {
    if (a.assignments[i].var != b.assignments[i].var) return false;
    if (!expr_equal(a.assignments[i].value, b.assignments[i].value)) return false;
  }
  if (a.constraint.has_value() != b.constraint.has_value()) return false;
  if (a.constraint && !expr_equal(*a.constraint, *b.constraint)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Lowering from parsed TFCommons expression subtrees
// ---------------------------------------------------------------------------

namespace {

std::vector<const Node*> node_children(const Node& n) {
  std::vector<const Node*> out;
  for (const auto& c : n.children)
    if (c.is_node()) out.push_back(&c.node());
  return out;
}

std::vector<const Token*> token_children(const Node& n) {
  std::vector<const Token*> out;
  for (const auto& c : n.children)
    if (!c.is_node()) out.push_back(&c.token());
  return out;
}

Expr lower_binary_chain(const Node& n) {
  // children: operand (op operand)*
  std::vector<Expr> operands;
  std::vector<std::string> ops;
  for (const auto& c : n.children) {
    if (c.is_node())
      operands.push_back(lower_expr(c.node()));
    else
      ops.push_back(c.token().text);
  }
  Expr acc = std::move(operands.front());
  for (size_t i = 0; i < ops.size(); ++i) {
    Expr bin;
    bin.kind = Expr::Kind::Binary;
    bin.text = ops[i];
    bin.span = n.span;
    bin.children.push_back(std::move(acc));
    bin.children.push_back(std::move(operands[i + 1]));
    acc = std::move(bin);
  }
  return acc;
}

std::vector<Expr> lower_arguments(const Node& args) {
  std::vector<Expr> out;
  for (const auto* e : node_children(args)) out.push_back(lower_expr(*e));
  return out;
}

Expr lower_postfix(const Node& n) {
  // PrimaryExpression ("." Name "(" Arguments? ")")*; children stay in
  // source order, so calls and their argument lists are walked together.
  const auto& ch = n.children;
  size_t i = 0;
  Expr acc = lower_expr(ch[i].node());
  ++i;
  while (i < ch.size()) {
    ++i;  // "."
    Expr call;
    call.kind = Expr::Kind::Call;
    call.has_receiver = true;
    call.text = ch[i].token().text;
    call.span = n.span;
    call.children.push_back(std::move(acc));
    i += 2;  // method name, "("
    if (i < ch.size() && ch[i].is_node()) {
      for (auto& a : lower_arguments(ch[i].node())) call.children.push_back(std::move(a));
      ++i;
    }
    ++i;  // ")"
    acc = std::move(call);
  }
  return acc;
}

Expr lower_primary(const Node& n) {
  Expr e;
  e.span = n.span;
  switch (n.alt) {
    case 0: {  // string literal
      e.kind = Expr::Kind::StringLit;
      e.text = token_children(n).front()->text;
      return e;
    }
    case 1: {  // schema variable
      e.kind = Expr::Kind::VarRef;
      e.text = token_children(n).front()->text;
      return e;
    }
    case 2: {  // free function call
      e.kind = Expr::Kind::Call;
      e.has_receiver = false;
      e.text = n.token_in_slot("callee")->text;
      auto kids = node_children(n);
      if (!kids.empty() && kids.front()->type == "Arguments")
        for (auto& a : lower_arguments(*kids.front())) e.children.push_back(std::move(a));
      return e;
    }
    default: {  // parenthesized
      e.kind = Expr::Kind::Paren;
      e.children.push_back(lower_expr(*node_children(n).front()));
      return e;
    }
  }
}

}  // namespace

Expr lower_expr(const Node& n) {
  const std::string& t = n.type;
  if (t == "Expression" || t == "BooleanExpression")
    return lower_expr(*node_children(n).front());
  if (t == "OrExpression" || t == "AndExpression" || t == "EqualityExpression")
    return lower_binary_chain(n);
  if (t == "UnaryExpression") {
    if (n.alt == 0) {
      Expr e;
      e.kind = Expr::Kind::Not;
      e.span = n.span;
      e.children.push_back(lower_expr(*node_children(n).front()));
      return e;
    }
    return lower_expr(*node_children(n).front());
  }
  if (t == "PostfixExpression") return lower_postfix(n);
  if (t == "PrimaryExpression") return lower_primary(n);
  throw EvalError("cannot lower expression node of type '" + t + "'");
}

WhereBlock lower_where(const Node& where_node) {
  WhereBlock out;
  for (const auto& c : where_node.children) {
    if (!c.is_node()) continue;
    const Node& n = c.node();
    if (n.type == "Assignment") {
      WhereBlock::Assignment a;
      a.var = token_children(n).front()->text;
      a.value = lower_expr(*node_children(n).front());
      a.span = n.span;
      out.assignments.push_back(std::move(a));
    } else {
      out.constraint = lower_expr(n);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::string kind_name(ExprValue::Kind k) {
  switch (k) {
    case ExprValue::Kind::String: return "String";
    case ExprValue::Kind::Bool: return "Bool";
    case ExprValue::Kind::NodeRef: return "NodeRef";
  }
  return "?";
}

[[noreturn]] void type_error(const std::string& what, const ExprValue& v, Span span) {
  throw EvalError("type mismatch: " + what + " applied to " + kind_name(v.kind), span);
}

const Node& resolve_node(const ExprValue& v, const EvalContext& ctx, Span span) {
  if (!ctx.model) throw EvalError("no model available to resolve node reference", span);
  const Node* n = ctx.model->find(v.node_id);
  if (!n) throw EvalError("dangling node reference", span);
  return *n;
}

bool shallow_equal(const ExprValue& a, const ExprValue& b, Span span) {
  if (a.kind != b.kind)
    throw EvalError("type mismatch: comparing " + kind_name(a.kind) + " with " +
                        kind_name(b.kind),
                    span);
  return a == b;
}

ExprValue eval_call(const Expr& e, const Binding& env, const EvalContext& ctx) {
  std::vector<ExprValue> vals;
  for (const auto& c : e.children) vals.push_back(eval_expr(c, env, ctx));
  const std::string& m = e.text;
  size_t argc = vals.size() - (e.has_receiver ? 1 : 0);
  auto arg = [&](size_t i) -> const ExprValue& { return vals[(e.has_receiver ? 1 : 0) + i]; };

  if (!e.has_receiver) {
    if (m == "capitalize") {
      if (argc != 1) throw EvalError("capitalize expects one argument", e.span);
      if (arg(0).kind != ExprValue::Kind::String) type_error("capitalize", arg(0), e.span);
      std::string s = arg(0).str;
      if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
      return ExprValue::string(std::move(s));
    }
    throw EvalError("unknown function '" + m + "'", e.span);
  }

  const ExprValue& recv = vals[0];
  if (m == "concat") {
    if (argc != 1) throw EvalError("concat expects one argument", e.span);
    if (recv.kind != ExprValue::Kind::String) type_error("concat", recv, e.span);
    if (arg(0).kind != ExprValue::Kind::String) type_error("concat", arg(0), e.span);
    return ExprValue::string(recv.str + arg(0).str);
  }
  if (m == "startsWith") {
    if (argc != 1) throw EvalError("startsWith expects one argument", e.span);
    if (recv.kind != ExprValue::Kind::String) type_error("startsWith", recv, e.span);
    if (arg(0).kind != ExprValue::Kind::String) type_error("startsWith", arg(0), e.span);
    return ExprValue::boolean_value(recv.str.rfind(arg(0).str, 0) == 0);
  }
  if (m == "capitalize") {
    if (argc != 0) throw EvalError("capitalize expects no arguments", e.span);
    if (recv.kind != ExprValue::Kind::String) type_error("capitalize", recv, e.span);
    std::string s = recv.str;
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return ExprValue::string(std::move(s));
  }
  if (m == "equals") {
    if (argc != 1) throw EvalError("equals expects one argument", e.span);
    return ExprValue::boolean_value(shallow_equal(recv, arg(0), e.span));
  }
  if (m == "deepEquals") {
    if (argc != 1) throw EvalError("deepEquals expects one argument", e.span);
    const ExprValue& other = arg(0);
    if (recv.kind == ExprValue::Kind::NodeRef && other.kind == ExprValue::Kind::NodeRef) {
      const Node& a = resolve_node(recv, ctx, e.span);
      const Node& b = resolve_node(other, ctx, e.span);
      return ExprValue::boolean_value(deep_equal(a, b));
    }
    if (recv.kind == ExprValue::Kind::String && other.kind == ExprValue::Kind::String)
      return ExprValue::boolean_value(recv.str == other.str);
    throw EvalError("type mismatch: deepEquals over " + kind_name(recv.kind) + " and " +
                        kind_name(other.kind),
                    e.span);
  }
  throw EvalError("unknown method '" + m + "'", e.span);
}

}  // namespace

ExprValue eval_expr(const Expr& e, const Binding& env, const EvalContext& ctx) {
  switch (e.kind) {
    case Expr::Kind::StringLit:
      return ExprValue::string(e.text);
    case Expr::Kind::VarRef: {
      auto it = env.var_env.find(e.text);
      if (it == env.var_env.end())
        throw EvalError("unbound schema variable '" + e.text + "'", e.span);
      return it->second;
    }
    case Expr::Kind::Paren:
      return eval_expr(e.children[0], env, ctx);
    case Expr::Kind::Not: {
      ExprValue v = eval_expr(e.children[0], env, ctx);
      if (v.kind != ExprValue::Kind::Bool) type_error("!", v, e.span);
      return ExprValue::boolean_value(!v.boolean);
    }
    case Expr::Kind::Binary: {
      ExprValue l = eval_expr(e.children[0], env, ctx);
      ExprValue r = eval_expr(e.children[1], env, ctx);
      if (e.text == "==") return ExprValue::boolean_value(shallow_equal(l, r, e.span));
      if (e.text == "!=") return ExprValue::boolean_value(!shallow_equal(l, r, e.span));
      if (l.kind != ExprValue::Kind::Bool) type_error(e.text, l, e.span);
      if (r.kind != ExprValue::Kind::Bool) type_error(e.text, r, e.span);
      if (e.text == "&&") return ExprValue::boolean_value(l.boolean && r.boolean);
      if (e.text == "||") return ExprValue::boolean_value(l.boolean || r.boolean);
      throw EvalError("unknown operator '" + e.text + "'", e.span);
    }
    case Expr::Kind::Call:
      return eval_call(e, env, ctx);
  }
  throw EvalError("unreachable expression kind");
}

std::pair<Binding, bool> run_where(const WhereBlock& w, const Binding& env,
                                   const EvalContext& ctx) {
  Binding out = env;
  for (const auto& a : w.assignments) {
    if (out.var_env.count(a.var))
      throw EvalError("schema variable '" + a.var + "' is already bound", a.span);
    out.var_env[a.var] = eval_expr(a.value, out, ctx);
  }
  if (!w.constraint) return {std::move(out), true};
  ExprValue v = eval_expr(*w.constraint, out, ctx);
  if (v.kind != ExprValue::Kind::Bool)
    throw EvalError("application constraint is not boolean", w.constraint->span);
  bool ok = v.boolean;
  return {std::move(out), ok};
}

}  // namespace dstl
