// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/rule_ir.hpp"

#include <algorithm>
#include <functional>

#include "align.hpp"

namespace dstl {

bool operator==(const NameConstraint& a, const NameConstraint& b) {
  return a.kind == b.kind && a.text == b.text;
}

namespace {

const DerivedGrammar::Provenance* prov_of(const DerivedGrammar& d, const std::string& type) {
  auto it = d.provenance.find(type);
  return it == d.provenance.end() ? nullptr : &it->second;
}

bool is_pattern_rule(const std::string& r) { return r == "4a" || r == "4b"; }
bool is_rep_rule(const std::string& r) { return r == "2a" || r == "2b"; }
bool is_neg_rule(const std::string& r) { return r == "3a" || r == "3b"; }

const Token* first_schema_var(const Node& n) {
  for (const auto& c : n.children)
    if (!c.is_node() && c.token().kind == Token::Kind::SchemaVar) return &c.token();
  return nullptr;
}

NameConstraint constraint_of_ident(const Node& ident) {
  NameConstraint nc;
  for (const auto& c : ident.children) {
    if (c.is_node()) continue;
    const Token& t = c.token();
    nc.span = t.span;
    if (t.kind == Token::Kind::SchemaVar) {
      nc.kind = t.text == "$_" ? NameConstraintKind::Wildcard : NameConstraintKind::Var;
      nc.text = t.text;
    } else {
      nc.kind = NameConstraintKind::Literal;
      nc.text = t.text;
    }
  }
  return nc;
}

struct Lowerer {
  const DerivedGrammar& d;
  const Grammar& l;
  const GrammarFacts& lf;
  RuleIR& ir;
  // name -> itself plus every interface it transitively implements/extends
  std::map<std::string, std::set<std::string>> up_closure;

  Lowerer(const DerivedGrammar& d_, RuleIR& ir_)
      : d(d_), l(d_.source_language), lf(d_.source_facts), ir(ir_) {
    for (const auto& p : l.productions) {
      std::set<std::string> ups = {p.name};
      std::vector<std::string> work(p.implements_list.begin(), p.implements_list.end());
      while (!work.empty()) {
        std::string cur = work.back();
        work.pop_back();
        if (!ups.insert(cur).second) continue;
        if (const Production* q = l.find(cur))
          work.insert(work.end(), q->implements_list.begin(), q->implements_list.end());
      }
      up_closure[p.name] = std::move(ups);
    }
  }

  bool denotes(const std::string& s, const std::string& t) const {
    auto it = up_closure.find(s);
    return it != up_closure.end() && it->second.count(t) != 0;
  }

  struct Ctx {
    PatternGraph* graph;
    bool in_nac = false;
  };

  void mark(const std::string& cc, const std::string& msg, Span span) {
    ir.markers.push_back({cc, msg, span});
  }

  // --- alignment matcher over transformation-language children ------------

  struct TlMatcher : align::Matcher {
    const Lowerer& lw;
    explicit TlMatcher(const Lowerer& lw_) : lw(lw_) {}

    bool terminal(const Node::Child& c, const std::string& text) const override {
      if (c.is_node()) return false;
      const Token& t = c.token();
      return (t.kind == Token::Kind::Keyword || t.kind == Token::Kind::Symbol) &&
             t.text == text;
    }
    bool keyword(const Node::Child& c, const std::string& kw) const override {
      if (!c.is_node()) return false;
      const auto* p = prov_of(lw.d, c.node().type);
      return p && (p->rule == "4c" || p->rule == "2b" || p->rule == "3b") && p->source == kw;
    }
    bool ref(const Node::Child& c, const RhsExpr& r) const override {
      if (r.target == "Name") return c.is_node() && c.node().type == "TfIdentifier";
      if (is_builtin_lexical_name(r.target)) {
        if (c.is_node()) return false;
        if (r.target == "SchemaVar") return c.token().kind == Token::Kind::SchemaVar;
        return c.token().kind == Token::Kind::String;
      }
      if (!c.is_node()) return false;
      const auto* p = prov_of(lw.d, c.node().type);
      return p && lw.denotes(p->source, r.target);
    }
  };

  // --- lowering ------------------------------------------------------------

  int add_node(Ctx ctx, PatternNode n) {
    int id = static_cast<int>(ctx.graph->nodes.size());
    n.id = id;
    if (n.parent >= 0) ctx.graph->node(n.parent).children.push_back(id);
    else ctx.graph->roots.push_back(id);
    ctx.graph->nodes.push_back(std::move(n));
    return id;
  }

  int lower_pattern(const Node& el, Ctx ctx, int parent, const std::string& slot) {
    const auto* p = prov_of(d, el.type);
    const std::string& type = p->source;
    const Production* lp = l.find(type);

    PatternNode node;
    node.type = type;
    node.parent = parent;
    node.slot = slot;
    node.span = el.span;

    int body_alts =
        (lp && lp->kind == ProdKind::Standard) ? static_cast<int>(lp->body->children.size()) : 0;
    bool concrete = p->rule == "4a" && el.alt < body_alts;
    bool whitebox = p->rule == "4a" && el.alt == body_alts + 1;

    if (!concrete) {
      const Token* var = first_schema_var(el);
      node.var = var ? var->text : "$_";
      if (node.var == "$_") {
        node.form = PatternNode::Form::Anonymous;
        node.var.clear();
      } else {
        node.form = whitebox ? PatternNode::Form::WhiteBox : PatternNode::Form::BlackBox;
      }
      if (whitebox && node.form == PatternNode::Form::Anonymous)
        node.form = PatternNode::Form::WhiteBox;  // $_ with inner syntax still constrains
    }

    int id = add_node(ctx, std::move(node));

    if (concrete) {
      lower_concrete_children(el, 0, el.children.size(), *lp, el.alt, ctx, id);
    } else if (whitebox) {
      // children: "N" $var "[[" inner... "]]"
      size_t begin = 0, end = el.children.size();
      for (size_t i = 0; i < el.children.size(); ++i) {
        const auto& c = el.children[i];
        if (!c.is_node() && c.token().text == "[[") {
          begin = i + 1;
          break;
        }
      }
      end = el.children.size() - 1;
      int chosen = -1;
      for (int a = 0; a < body_alts; ++a) {
        if (align::align_children(lp->body->children[a], el.children, begin, end,
                                  TlMatcher(*this))) {
          chosen = a;
          break;
        }
      }
      if (chosen < 0) throw Error("internal: white-box syntax does not align with '" + type + "'");
      lower_concrete_children(el, begin, end, *lp, chosen, ctx, id);
    }
    return id;
  }

  void lower_concrete_children(const Node& el, size_t begin, size_t end, const Production& lp,
                               int l_alt, Ctx ctx, int node_id) {
    auto asg = align::align_children(lp.body->children[static_cast<size_t>(l_alt)], el.children,
                                     begin, end, TlMatcher(*this));
    if (!asg) throw Error("internal: pattern children do not align with '" + lp.name + "'");
    for (size_t i = begin; i < end; ++i) {
      auto it = asg->elem_of.find(static_cast<int>(i));
      if (it == asg->elem_of.end()) continue;
      const RhsExpr& elem = *it->second;
      const auto& child = el.children[i];
      if (elem.kind == RhsExpr::Kind::OptionalKeyword) {
        lower_keyword_element(child.node(), ctx, node_id);
      } else if (elem.kind == RhsExpr::Kind::NontermRef) {
        if (elem.target == "Name") {
          lower_name_element(child.node(), ctx, node_id, lf.ref_slots.at(&elem));
        } else if (!is_builtin_lexical_name(elem.target)) {
          dispatch_child(child.node(), ctx, node_id, lf.ref_slots.at(&elem));
        }
      }
    }
  }

  void dispatch_child(const Node& child, Ctx ctx, int node_id, const std::string& slot) {
    const auto* p = prov_of(d, child.type);
    if (!p) throw Error("internal: child without provenance '" + child.type + "'");
    if (is_pattern_rule(p->rule)) {
      lower_pattern(child, ctx, node_id, slot);
    } else if (is_rep_rule(p->rule)) {
      lower_rep(child, ctx, node_id, slot);
    } else if (is_neg_rule(p->rule)) {
      lower_nac(child, ctx, node_id, slot);
    }
  }

  void lower_keyword_element(const Node& kn, Ctx ctx, int node_id) {
    const auto* p = prov_of(d, kn.type);
    const std::string& kw = p->source;
    PatternNode& node = ctx.graph->node(node_id);
    if (p->rule == "4c") {
      node.keyword_constraints[kw] = KeywordReq::Required;
      return;
    }
    if (p->rule == "3b") {
      node.keyword_constraints[kw] = KeywordReq::Forbidden;
      return;
    }
    // 2b: alternative 0 removes the keyword, alternative 1 adds it
    if (ctx.in_nac) {
      mark("CC6", "modification of keyword '" + kw + "' inside a negative element", kn.span);
      return;
    }
    Edit e;
    e.anchor = node_id;
    e.keyword = kw;
    e.span = kn.span;
    if (kn.alt == 0) {
      node.keyword_constraints[kw] = KeywordReq::Required;
      e.kind = Edit::Kind::KeywordRemove;
    } else {
      node.keyword_constraints[kw] = KeywordReq::Forbidden;
      e.kind = Edit::Kind::KeywordAdd;
    }
    ir.edits.push_back(std::move(e));
  }

  void lower_name_element(const Node& tfi, Ctx ctx, int node_id, const std::string& slot) {
    PatternNode& node = ctx.graph->node(node_id);
    int occurrence = 0;
    for (const auto& [s, nc] : node.name_constraints)
      if (s == slot) ++occurrence;

    std::vector<const Node*> idents;
    for (const auto& c : tfi.children)
      if (c.is_node()) idents.push_back(&c.node());

    if (tfi.alt == 0) {
      node.name_constraints.emplace_back(slot, constraint_of_ident(*idents.front()));
      return;
    }
    // replacement form: lhs constrains, rhs rewrites
    NameConstraint from = constraint_of_ident(*idents.front());
    NameConstraint to = constraint_of_ident(*idents.back());
    node.name_constraints.emplace_back(slot, from);
    if (ctx.in_nac) {
      mark("CC6", "name replacement inside a negative element", tfi.span);
      return;
    }
    Edit e;
    e.kind = Edit::Kind::NameReplace;
    e.anchor = node_id;
    e.name_slot = slot;
    e.name_occurrence = occurrence;
    e.name_from = from;
    e.name_to = to;
    e.span = tfi.span;
    ir.edits.push_back(std::move(e));
  }

  void lower_rep(const Node& el, Ctx ctx, int anchor, const std::string& slot) {
    const Node* lhs = nullptr;
    const Node* rhs = nullptr;
    for (const auto& c : el.children) {
      if (!c.is_node()) continue;
      if (c.slot == "lhs") lhs = &c.node();
      if (c.slot == "rhs") rhs = &c.node();
    }
    if (ctx.in_nac) {
      mark("CC6", "modification inside a negative element", el.span);
      if (lhs) lower_pattern(*lhs, ctx, anchor, slot);
      return;
    }
    int lhs_id = -1;
    if (lhs) {
      lhs_id = lower_pattern(*lhs, ctx, anchor, slot);
      ctx.graph->node(lhs_id).to_delete = true;
    }
    std::optional<Template> tmpl;
    if (rhs) {
      const auto* rp = prov_of(d, rhs->type);
      if (is_neg_rule(rp->rule)) {
        mark("CC4", "negative element on the right-hand side of a modification", rhs->span);
      } else {
        tmpl = Template{rp->source, std::shared_ptr<const Node>(rhs->clone().release())};
        check_template_syntax(*rhs);
      }
    }
    if (lhs_id < 0 && !tmpl) return;  // [[ :- ]] changes nothing
    Edit e;
    e.kind = Edit::Kind::Replace;
    e.anchor = anchor;
    e.slot = slot;
    e.lhs_node = lhs_id;
    e.rhs = std::move(tmpl);
    e.span = el.span;
    ir.edits.push_back(std::move(e));
  }

  void check_template_syntax(const Node& n) {
    const auto* p = prov_of(d, n.type);
    if (p && is_neg_rule(p->rule))
      mark("CC4", "negative element on the right-hand side of a modification", n.span);
    for (const auto& c : n.children)
      if (c.is_node()) check_template_syntax(c.node());
  }

  void lower_nac(const Node& el, Ctx outer, int anchor, const std::string& slot) {
    if (outer.in_nac) {
      mark("CC5", "nested negative element", el.span);
      return;
    }
    Nac nac;
    nac.anchor = anchor;
    nac.slot = slot;
    nac.span = el.span;
    Ctx ctx{&nac.graph, true};

    const Node* inner = nullptr;
    for (const auto& c : el.children)
      if (c.is_node()) inner = &c.node();
    while (inner) {
      const auto* p = prov_of(d, inner->type);
      if (is_pattern_rule(p->rule)) {
        lower_pattern(*inner, ctx, -1, "");
        break;
      }
      if (is_neg_rule(p->rule)) {
        mark("CC5", "nested negative element", inner->span);
        const Node* deeper = nullptr;
        for (const auto& c : inner->children)
          if (c.is_node()) deeper = &c.node();
        inner = deeper;
        continue;
      }
      if (is_rep_rule(p->rule)) {
        mark("CC6", "modification inside a negative element", inner->span);
        const Node* lhs = nullptr;
        for (const auto& c : inner->children)
          if (c.is_node() && c.slot == "lhs") lhs = &c.node();
        if (lhs) lower_pattern(*lhs, ctx, -1, "");
        break;
      }
      break;
    }
    ir.nacs.push_back(std::move(nac));
  }
};

}  // namespace

RuleIR lower_to_ir(const SyntaxTree& rule_tree, const DerivedGrammar& dstl) {
  RuleIR ir;
  ir.dstl = &dstl;
  Lowerer lw(dstl, ir);
  Lowerer::Ctx ctx{&ir.lhs, false};

  for (const auto& c : rule_tree.root().children) {
    if (!c.is_node()) continue;
    const Node& el = c.node();
    if (el.type == "Where") {
      ir.where = lower_where(el);
      ir.has_where = true;
      ir.where_syntax = std::shared_ptr<const Node>(el.clone().release());
      continue;
    }
    const auto* p = prov_of(dstl, el.type);
    if (!p) throw Error("internal: top-level element without provenance '" + el.type + "'");
    if (is_pattern_rule(p->rule)) {
      lw.lower_pattern(el, ctx, -1, "");
    } else if (is_rep_rule(p->rule)) {
      lw.lower_rep(el, ctx, -1, "");
    } else if (is_neg_rule(p->rule)) {
      lw.lower_nac(el, ctx, -1, "");
    }
    ir.element_syntax.push_back(std::shared_ptr<const Node>(el.clone().release()));
  }
  return ir;
}

// ---------------------------------------------------------------------------
// Variable census and context conditions
// ---------------------------------------------------------------------------

namespace {

struct VarOcc {
  std::string var;
  Span span;
};

void element_binders_of(const PatternGraph& g, std::vector<VarOcc>& out) {
  for (const auto& n : g.nodes)
    if (!n.var.empty()) out.push_back({n.var, n.span});
}

void name_vars_of(const PatternGraph& g, std::vector<VarOcc>& out) {
  for (const auto& n : g.nodes)
    for (const auto& [slot, nc] : n.name_constraints)
      if (nc.kind == NameConstraintKind::Var) out.push_back({nc.text, nc.span});
}

void template_vars_of(const Node& n, std::vector<VarOcc>& out) {
  for (const auto& c : n.children) {
    if (c.is_node()) {
      template_vars_of(c.node(), out);
    } else if (c.token().kind == Token::Kind::SchemaVar) {
      out.push_back({c.token().text, c.token().span});
    }
  }
}

void expr_vars_of(const Expr& e, std::vector<VarOcc>& out) {
  if (e.kind == Expr::Kind::VarRef) out.push_back({e.text, e.span});
  for (const auto& c : e.children) expr_vars_of(c, out);
}

}  // namespace

std::set<std::string> lhs_element_vars(const RuleIR& ir) {
  std::vector<VarOcc> occ;
  element_binders_of(ir.lhs, occ);
  std::set<std::string> out;
  for (const auto& o : occ) out.insert(o.var);
  return out;
}

std::set<std::string> lhs_name_vars(const RuleIR& ir) {
  std::vector<VarOcc> occ;
  name_vars_of(ir.lhs, occ);
  std::set<std::string> out;
  for (const auto& o : occ) out.insert(o.var);
  return out;
}

std::set<std::string> rhs_template_vars(const RuleIR& ir) {
  std::set<std::string> out;
  std::vector<VarOcc> occ;
  for (const auto& e : ir.edits) {
    if (e.kind == Edit::Kind::Replace && e.rhs) template_vars_of(*e.rhs->syntax, occ);
    if (e.kind == Edit::Kind::NameReplace && e.name_to.kind == NameConstraintKind::Var)
      occ.push_back({e.name_to.text, e.name_to.span});
  }
  for (const auto& o : occ)
    if (o.var != "$_") out.insert(o.var);
  return out;
}

std::vector<Violation> check_conditions(const RuleIR& ir) {
  std::vector<Violation> out = ir.markers;

  std::vector<VarOcc> lhs_elem_occ, lhs_name_occ;
  element_binders_of(ir.lhs, lhs_elem_occ);
  name_vars_of(ir.lhs, lhs_name_occ);

  std::set<std::string> lhs_elems, lhs_names, assigned;
  for (const auto& o : lhs_name_occ) lhs_names.insert(o.var);
  for (const auto& a : ir.where.assignments) assigned.insert(a.var);

  // CC1: element variables bind at most once across lhs and assignments
  std::set<std::string> seen_elem;
  for (const auto& o : lhs_elem_occ) {
    if (!seen_elem.insert(o.var).second)
      out.push_back({"CC1", "schema variable '" + o.var + "' is bound more than once", o.span});
    lhs_elems.insert(o.var);
  }
  for (const auto& o : lhs_elem_occ)
    if (lhs_names.count(o.var))
      out.push_back(
          {"CC1", "schema variable '" + o.var + "' is used for both an element and a name",
           o.span});
  for (const auto& a : ir.where.assignments)
    if (lhs_elems.count(a.var))
      out.push_back({"CC1", "schema variable '" + a.var + "' is bound by the pattern and assigned",
                     a.span});
  {
    std::set<std::string> seen_assign;
    for (const auto& a : ir.where.assignments)
      if (!seen_assign.insert(a.var).second)
        out.push_back({"CC1", "schema variable '" + a.var + "' is assigned more than once",
                       a.span});
  }
  for (const auto& nac : ir.nacs) {
    std::vector<VarOcc> nac_elem_occ;
    element_binders_of(nac.graph, nac_elem_occ);
    std::set<std::string> seen_nac;
    for (const auto& o : nac_elem_occ) {
      if (lhs_elems.count(o.var) || assigned.count(o.var) || !seen_nac.insert(o.var).second)
        out.push_back({"CC1", "schema variable '" + o.var + "' is bound more than once", o.span});
    }
  }

  // CC2: replacement content only uses bound or assigned variables
  std::set<std::string> bound;
  bound.insert(lhs_elems.begin(), lhs_elems.end());
  bound.insert(lhs_names.begin(), lhs_names.end());
  bound.insert(assigned.begin(), assigned.end());
  {
    std::vector<VarOcc> occ;
    for (const auto& e : ir.edits) {
      if (e.kind == Edit::Kind::Replace && e.rhs) template_vars_of(*e.rhs->syntax, occ);
      if (e.kind == Edit::Kind::NameReplace && e.name_to.kind == NameConstraintKind::Var)
        occ.push_back({e.name_to.text, e.name_to.span});
      if (e.kind == Edit::Kind::NameReplace && e.name_to.kind == NameConstraintKind::Wildcard)
        occ.push_back({"$_", e.name_to.span});
    }
    for (const auto& o : occ) {
      if (o.var == "$_")
        out.push_back({"CC2", "'$_' cannot appear in replacement content", o.span});
      else if (!bound.count(o.var))
        out.push_back({"CC2", "schema variable '" + o.var +
                                  "' on the right-hand side is neither bound nor assigned",
                       o.span});
    }
  }

  // CC3: where-block variables exist per their role
  std::set<std::string> rhs_vars = rhs_template_vars(ir);
  std::set<std::string> assigned_so_far;
  for (const auto& a : ir.where.assignments) {
    if (lhs_names.count(a.var))
      out.push_back({"CC3", "assigned variable '" + a.var + "' is already bound by the pattern",
                     a.span});
    else if (!rhs_vars.count(a.var))
      out.push_back({"CC3", "assigned variable '" + a.var +
                                "' does not occur on the right-hand side of a modification",
                     a.span});
    std::vector<VarOcc> uses;
    expr_vars_of(a.value, uses);
    for (const auto& u : uses)
      if (!lhs_elems.count(u.var) && !lhs_names.count(u.var) && !assigned_so_far.count(u.var))
        out.push_back({"CC3", "schema variable '" + u.var + "' does not exist here", u.span});
    assigned_so_far.insert(a.var);
  }
  if (ir.where.constraint) {
    std::vector<VarOcc> uses;
    expr_vars_of(*ir.where.constraint, uses);
    for (const auto& u : uses)
      if (!bound.count(u.var))
        out.push_back({"CC3", "schema variable '" + u.var + "' does not exist here", u.span});
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.condition != b.condition) return a.condition < b.condition;
    return a.span.begin < b.span.begin;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Rendering and equality
// ---------------------------------------------------------------------------

std::string render_rule(const RuleIR& ir) {
  std::string out;
  for (const auto& el : ir.element_syntax) {
    out += unparse(*el);
    out += "\n";
  }
  if (ir.has_where && ir.where_syntax) out += unparse(*ir.where_syntax);
  return out;
}

namespace {

bool node_equal(const PatternNode& a, const PatternNode& b) {
  if (a.id != b.id || a.type != b.type || a.form != b.form || a.var != b.var) return false;
  if (a.children != b.children || a.parent != b.parent || a.slot != b.slot) return false;
  if (a.to_delete != b.to_delete) return false;
  if (a.keyword_constraints != b.keyword_constraints) return false;
  if (a.name_constraints.size() != b.name_constraints.size()) return false;
  for (size_t i = 0; i < a.name_constraints.size(); ++i) {
    if (a.name_constraints[i].first != b.name_constraints[i].first) return false;
    if (!(a.name_constraints[i].second == b.name_constraints[i].second)) return false;
  }
  return true;
}

bool graph_equal(const PatternGraph& a, const PatternGraph& b) {
  if (a.roots != b.roots || a.nodes.size() != b.nodes.size()) return false;
  for (size_t i = 0; i < a.nodes.size(); ++i)
    if (!node_equal(a.nodes[i], b.nodes[i])) return false;
  return true;
}

}  // namespace

bool ir_equal(const RuleIR& a, const RuleIR& b) {
  if (!graph_equal(a.lhs, b.lhs)) return false;
  if (a.nacs.size() != b.nacs.size()) return false;
  for (size_t i = 0; i < a.nacs.size(); ++i) {
    if (a.nacs[i].anchor != b.nacs[i].anchor || a.nacs[i].slot != b.nacs[i].slot) return false;
    if (!graph_equal(a.nacs[i].graph, b.nacs[i].graph)) return false;
  }
  if (a.edits.size() != b.edits.size()) return false;
  for (size_t i = 0; i < a.edits.size(); ++i) {
    const Edit& x = a.edits[i];
    const Edit& y = b.edits[i];
    if (x.kind != y.kind || x.anchor != y.anchor || x.slot != y.slot ||
        x.lhs_node != y.lhs_node || x.keyword != y.keyword || x.name_slot != y.name_slot ||
        x.name_occurrence != y.name_occurrence)
      return false;
    if (!(x.name_from == y.name_from) || !(x.name_to == y.name_to)) return false;
    if (x.rhs.has_value() != y.rhs.has_value()) return false;
    if (x.rhs) {
      if (x.rhs->type != y.rhs->type) return false;
      if (!deep_equal(*x.rhs->syntax, *y.rhs->syntax)) return false;
    }
  }
  if (a.has_where != b.has_where) return false;
  if (a.has_where && !where_equal(a.where, b.where)) return false;
  return true;
}

}  // namespace dstl
