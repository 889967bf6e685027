// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/match.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "align.hpp"

namespace dstl {

namespace {

bool type_matches(const GrammarFacts& lf, const std::string& pattern_type,
                  const std::string& node_type) {
  if (pattern_type == node_type) return true;
  return lf.concrete_types(pattern_type).count(node_type) != 0;
}

// n-th token child with the given slot, or nullptr
const Token* name_token_at(const Node& n, const std::string& slot, int occurrence) {
  int seen = 0;
  for (const auto& c : n.children) {
    if (c.is_node() || c.slot != slot) continue;
    if (seen++ == occurrence) return &c.token();
  }
  return nullptr;
}

bool keyword_ok(const Node& n, const std::string& kw, KeywordReq req) {
  auto it = n.keyword_flags.find(kw);
  bool present = it != n.keyword_flags.end() && it->second;
  return req == KeywordReq::Required ? present : !present;
}

int constraint_weight(const PatternNode& p) {
  int w = static_cast<int>(p.keyword_constraints.size() + p.children.size());
  for (const auto& [slot, nc] : p.name_constraints)
    if (nc.kind != NameConstraintKind::Wildcard) ++w;
  return w;
}

std::vector<PlanStep> compile_graph_plan(const PatternGraph& g, int nac_anchor,
                                         const std::string& nac_slot) {
  std::vector<PlanStep> steps;
  std::set<int> planned;
  std::set<std::string> seen_vars;

  auto available = [&](int id) {
    const PatternNode& n = g.node(id);
    if (planned.count(id)) return false;
    return n.parent < 0 || planned.count(n.parent) != 0;
  };

  while (planned.size() < g.nodes.size()) {
    int best = -1;
    for (const auto& n : g.nodes) {
      if (!available(n.id)) continue;
      if (best < 0 || constraint_weight(n) > constraint_weight(g.node(best))) best = n.id;
    }
    if (best < 0) break;
    const PatternNode& n = g.node(best);

    PlanStep bind;
    bind.node = n.id;
    if (n.parent >= 0) {
      bind.kind = PlanStep::Kind::ExtendChild;
      bind.parent = n.parent;
      bind.slot = n.slot;
    } else if (nac_anchor >= 0) {
      bind.kind = PlanStep::Kind::ExtendChild;
      bind.parent = -1;  // resolved to the anchor binding at run time
      bind.slot = nac_slot;
    } else {
      bind.kind = PlanStep::Kind::EnumerateByType;
      bind.type = n.type;
    }
    steps.push_back(bind);

    PlanStep inj;
    inj.kind = PlanStep::Kind::CheckInjective;
    inj.node = n.id;
    steps.push_back(inj);

    for (const auto& [kw, req] : n.keyword_constraints) {
      PlanStep s;
      s.kind = PlanStep::Kind::CheckKeyword;
      s.node = n.id;
      s.keyword = kw;
      s.req = req;
      steps.push_back(s);
    }
    std::map<std::string, int> occ;
    for (const auto& [slot, nc] : n.name_constraints) {
      PlanStep s;
      s.node = n.id;
      s.name_slot = slot;
      s.occurrence = occ[slot]++;
      s.constraint = nc;
      bool repeat = nc.kind == NameConstraintKind::Var && !seen_vars.insert(nc.text).second;
      s.kind = repeat ? PlanStep::Kind::CheckNameVarEquality : PlanStep::Kind::CheckName;
      steps.push_back(s);
    }
    planned.insert(n.id);
  }
  return steps;
}

}  // namespace

SearchPlan compile_search_plan(const RuleIR& ir) {
  SearchPlan plan;
  plan.steps = compile_graph_plan(ir.lhs, -1, "");
  for (const auto& nac : ir.nacs)
    plan.nac_plans.push_back(compile_graph_plan(nac.graph, nac.anchor, nac.slot));
  return plan;
}

// ---------------------------------------------------------------------------
// Plan execution
// ---------------------------------------------------------------------------

namespace {

struct ExecState {
  std::map<int, const Node*> bound;  // pattern id -> model node
  std::map<std::string, ExprValue> env;
};

struct Executor {
  const RuleIR& ir;
  const SyntaxTree& model;
  const GrammarFacts& lf;
  std::map<int, int> doc_order;
  std::vector<const Node*> all_nodes;  // document order

  explicit Executor(const RuleIR& ir_, const SyntaxTree& model_)
      : ir(ir_), model(model_), lf(ir_.lang_facts()), doc_order(model_.document_order()) {
    std::function<void(const Node&)> walk = [&](const Node& n) {
      all_nodes.push_back(&n);
      for (const auto& c : n.children)
        if (c.is_node()) walk(c.node());
    };
    walk(model.root());
  }

  // Runs steps[si..] over graph g. on_complete returns true to stop the
  // whole search (used for NAC existence checks).
  bool run(const std::vector<PlanStep>& steps, size_t si, const PatternGraph& g,
           ExecState& st, const std::set<int>& outside_used, const Node* nac_anchor_node,
           const std::function<bool(const ExecState&)>& on_complete) {
    if (si == steps.size()) return on_complete(st);
    const PlanStep& s = steps[si];
    switch (s.kind) {
      case PlanStep::Kind::EnumerateByType: {
        for (const Node* cand : all_nodes) {
          if (!type_matches(lf, g.node(s.node).type, cand->type)) continue;
          ExecState st2 = st;
          st2.bound[s.node] = cand;
          if (bind_var(g, s.node, cand, st2) && run(steps, si + 1, g, st2, outside_used,
                                                    nac_anchor_node, on_complete))
            return true;
        }
        return false;
      }
      case PlanStep::Kind::ExtendChild: {
        const Node* parent =
            s.parent >= 0 ? st.bound.at(s.parent) : nac_anchor_node;
        if (!parent) return false;
        for (const auto& c : parent->children) {
          if (!c.is_node() || c.slot != s.slot) continue;
          const Node* cand = &c.node();
          if (!type_matches(lf, g.node(s.node).type, cand->type)) continue;
          ExecState st2 = st;
          st2.bound[s.node] = cand;
          if (bind_var(g, s.node, cand, st2) && run(steps, si + 1, g, st2, outside_used,
                                                    nac_anchor_node, on_complete))
            return true;
        }
        return false;
      }
      case PlanStep::Kind::CheckInjective: {
        const Node* mine = st.bound.at(s.node);
        if (outside_used.count(mine->id)) return false;
        for (const auto& [pid, n] : st.bound)
          if (pid != s.node && n == mine) return false;
        return run(steps, si + 1, g, st, outside_used, nac_anchor_node, on_complete);
      }
      case PlanStep::Kind::CheckKeyword: {
        if (!keyword_ok(*st.bound.at(s.node), s.keyword, s.req)) return false;
        return run(steps, si + 1, g, st, outside_used, nac_anchor_node, on_complete);
      }
      case PlanStep::Kind::CheckName:
      case PlanStep::Kind::CheckNameVarEquality: {
        const Token* tok = name_token_at(*st.bound.at(s.node), s.name_slot, s.occurrence);
        if (!tok) return false;
        const NameConstraint& nc = s.constraint;
        if (nc.kind == NameConstraintKind::Literal) {
          if (tok->text != nc.text) return false;
        } else if (nc.kind == NameConstraintKind::Var) {
          auto it = st.env.find(nc.text);
          if (it != st.env.end()) {
            if (!(it->second == ExprValue::string(tok->text))) return false;
          } else {
            ExecState st2 = st;
            st2.env[nc.text] = ExprValue::string(tok->text);
            return run(steps, si + 1, g, st2, outside_used, nac_anchor_node, on_complete);
          }
        }
        return run(steps, si + 1, g, st, outside_used, nac_anchor_node, on_complete);
      }
    }
    return false;
  }

  bool bind_var(const PatternGraph& g, int pid, const Node* cand, ExecState& st) {
    const PatternNode& p = g.node(pid);
    if (p.var.empty()) return true;
    auto it = st.env.find(p.var);
    if (it != st.env.end()) return it->second == ExprValue::node(cand->id);
    st.env[p.var] = ExprValue::node(cand->id);
    return true;
  }

  bool nac_holds(const SearchPlan& plan, size_t nac_idx, const ExecState& positive) {
    const Nac& nac = ir.nacs[nac_idx];
    std::set<int> used;
    for (const auto& [pid, n] : positive.bound) used.insert(n->id);
    const Node* anchor_node =
        nac.anchor >= 0 ? positive.bound.at(nac.anchor) : nullptr;
    ExecState st;
    st.env = positive.env;
    bool extension_exists =
        run(plan.nac_plans[nac_idx], 0, nac.graph, st, used, anchor_node,
            [](const ExecState&) { return true; });
    return !extension_exists;
  }
};

}  // namespace

std::vector<Match> find_matches(const SearchPlan& plan, const SyntaxTree& model,
                                const RuleIR& ir) {
  Executor ex(ir, model);
  std::vector<Match> out;
  ExecState st;
  EvalContext ctx{&model};
  ex.run(plan.steps, 0, ir.lhs, st, {}, nullptr, [&](const ExecState& complete) {
    for (size_t i = 0; i < ir.nacs.size(); ++i)
      if (!ex.nac_holds(plan, i, complete)) return false;
    Binding b;
    for (const auto& [pid, n] : complete.bound) b.node_binding[pid] = n->id;
    b.var_env = complete.env;
    auto [extended, ok] = run_where(ir.where, b, ctx);
    if (!ok) return false;
    out.push_back(Match{std::move(extended)});
    return false;  // keep enumerating
  });
  return out;
}

// ---------------------------------------------------------------------------
// Edit application
// ---------------------------------------------------------------------------

namespace {

bool ident_shaped_text(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

Token make_token(Token::Kind kind, std::string text) {
  Token t;
  t.kind = kind;
  t.text = std::move(text);
  return t;
}

struct LMatcher : align::Matcher {
  const GrammarFacts& lf;
  explicit LMatcher(const GrammarFacts& lf_) : lf(lf_) {}

  bool terminal(const Node::Child& c, const std::string& text) const override {
    if (c.is_node()) return false;
    const Token& t = c.token();
    return (t.kind == Token::Kind::Keyword || t.kind == Token::Kind::Symbol) && t.text == text;
  }
  bool keyword(const Node::Child& c, const std::string& kw) const override {
    return !c.is_node() && c.token().kind == Token::Kind::Keyword && c.token().text == kw;
  }
  bool ref(const Node::Child& c, const RhsExpr& r) const override {
    if (r.target == "Name")
      return !c.is_node() && c.token().kind == Token::Kind::Name;
    if (r.target == "SchemaVar")
      return !c.is_node() && c.token().kind == Token::Kind::SchemaVar;
    if (r.target == "String")
      return !c.is_node() && c.token().kind == Token::Kind::String;
    return c.is_node() && type_matches(lf, r.target, c.node().type);
  }
};

// transformation-language children against the source-language body
struct TlTemplateMatcher : align::Matcher {
  const DerivedGrammar& d;
  const std::map<std::string, std::set<std::string>>* up = nullptr;

  explicit TlTemplateMatcher(const DerivedGrammar& d_) : d(d_) {}

  const DerivedGrammar::Provenance* prov(const std::string& type) const {
    auto it = d.provenance.find(type);
    return it == d.provenance.end() ? nullptr : &it->second;
  }
  bool denotes(const std::string& s, const std::string& t) const {
    if (s == t) return true;
    std::set<std::string> seen;
    std::vector<std::string> work = {s};
    while (!work.empty()) {
      std::string cur = work.back();
      work.pop_back();
      if (!seen.insert(cur).second) continue;
      if (cur == t) return true;
      if (const Production* p = d.source_language.find(cur))
        work.insert(work.end(), p->implements_list.begin(), p->implements_list.end());
    }
    return false;
  }

  bool terminal(const Node::Child& c, const std::string& text) const override {
    if (c.is_node()) return false;
    const Token& t = c.token();
    return (t.kind == Token::Kind::Keyword || t.kind == Token::Kind::Symbol) && t.text == text;
  }
  bool keyword(const Node::Child& c, const std::string& kw) const override {
    if (!c.is_node()) return false;
    const auto* p = prov(c.node().type);
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
    const auto* p = prov(c.node().type);
    return p && denotes(p->source, r.target);
  }
};

struct Applier {
  const RuleIR& ir;
  const SyntaxTree& original;
  SyntaxTree& out;
  const Match& match;
  const Grammar& l;
  const GrammarFacts& lf;
  TlTemplateMatcher tl_matcher;
  LMatcher l_matcher;

  Applier(const RuleIR& ir_, const SyntaxTree& original_, SyntaxTree& out_, const Match& m_)
      : ir(ir_),
        original(original_),
        out(out_),
        match(m_),
        l(ir_.lang()),
        lf(ir_.lang_facts()),
        tl_matcher(*ir_.dstl),
        l_matcher(lf) {}

  Node* bound_in_out(int pattern_id) {
    auto it = match.binding.node_binding.find(pattern_id);
    if (it == match.binding.node_binding.end()) return nullptr;
    return out.find(it->second);
  }

  std::string resolve_name(const NameConstraint& nc) {
    if (nc.kind == NameConstraintKind::Literal) return nc.text;
    if (nc.kind == NameConstraintKind::Var) {
      auto it = match.binding.var_env.find(nc.text);
      if (it == match.binding.var_env.end() || it->second.kind != ExprValue::Kind::String)
        throw ApplyError("name variable '" + nc.text + "' is not bound to a string");
      return it->second.str;
    }
    throw ApplyError("'$_' cannot produce a name");
  }

  std::unique_ptr<Node> clone_fresh(const Node& n) {
    auto c = n.clone();
    std::function<void(Node&)> renumber = [&](Node& x) {
      x.id = out.fresh_id();
      for (auto& ch : x.children)
        if (ch.is_node()) renumber(ch.node());
    };
    renumber(*c);
    return c;
  }

  // --- template instantiation ---------------------------------------------

  std::unique_ptr<Node> instantiate(const Node& syntax) {
    const auto* p = tl_matcher.prov(syntax.type);
    if (!p) throw ApplyError("cannot instantiate node of type '" + syntax.type + "'");
    if (p->rule == "2a" || p->rule == "2b") {
      // nested replacement inside created content contributes its right side
      for (const auto& c : syntax.children)
        if (c.is_node() && c.slot == "rhs") return instantiate(c.node());
      return nullptr;
    }
    if (p->rule == "3a" || p->rule == "3b")
      throw ApplyError("negative element in replacement content");

    const std::string& type = p->source;
    const Production* lp = l.find(type);
    int body_alts =
        (lp && lp->kind == ProdKind::Standard) ? static_cast<int>(lp->body->children.size()) : 0;
    bool concrete = p->rule == "4a" && syntax.alt < body_alts;
    bool whitebox = p->rule == "4a" && syntax.alt == body_alts + 1;

    if (!concrete && !whitebox) {
      // black box: insert a copy of the bound element
      const Token* var = nullptr;
      for (const auto& c : syntax.children)
        if (!c.is_node() && c.token().kind == Token::Kind::SchemaVar) var = &c.token();
      if (!var || var->text == "$_")
        throw ApplyError("replacement content requires a bound schema variable");
      auto it = match.binding.var_env.find(var->text);
      if (it == match.binding.var_env.end() || it->second.kind != ExprValue::Kind::NodeRef)
        throw ApplyError("schema variable '" + var->text + "' is not bound to an element");
      const Node* bound = original.find(it->second.node_id);
      if (!bound) throw ApplyError("schema variable '" + var->text + "' is dangling");
      return clone_fresh(*bound);
    }

    size_t begin = 0, end = syntax.children.size();
    int l_alt = syntax.alt;
    if (whitebox) {
      for (size_t i = 0; i < syntax.children.size(); ++i) {
        const auto& c = syntax.children[i];
        if (!c.is_node() && c.token().text == "[[") {
          begin = i + 1;
          break;
        }
      }
      end = syntax.children.size() - 1;
      l_alt = -1;
    }

    for (int a = (l_alt >= 0 ? l_alt : 0); a < body_alts; ++a) {
      auto asg = align::align_children(lp->body->children[static_cast<size_t>(a)],
                                       syntax.children, begin, end, tl_matcher);
      if (!asg) {
        if (l_alt >= 0) break;
        continue;
      }
      return build_from_alignment(syntax, begin, end, *lp, a, *asg);
    }
    throw ApplyError("replacement content does not fit production '" + type + "'");
  }

  std::unique_ptr<Node> build_from_alignment(const Node& syntax, size_t begin, size_t end,
                                             const Production& lp, int l_alt,
                                             const align::Assignment& asg) {
    auto node = std::make_unique<Node>();
    node->id = out.fresh_id();
    node->type = lp.name;
    node->alt = l_alt;
    auto kws = lf.keywords_of.find(lp.name);
    if (kws != lf.keywords_of.end())
      for (const auto& kw : kws->second) node->keyword_flags[kw] = false;

    for (size_t i = begin; i < end; ++i) {
      auto it = asg.elem_of.find(static_cast<int>(i));
      if (it == asg.elem_of.end()) continue;
      const RhsExpr& elem = *it->second;
      const auto& child = syntax.children[i];

      if (elem.kind == RhsExpr::Kind::Terminal) {
        node->add_token("", child.token());
        continue;
      }
      if (elem.kind == RhsExpr::Kind::OptionalKeyword) {
        const Node& kn = child.node();
        const auto* kp = tl_matcher.prov(kn.type);
        bool present = kp->rule == "4c" || (kp->rule == "2b" && kn.alt == 1);
        if (kp->rule == "3b") present = false;
        if (present) {
          node->add_token("", make_token(Token::Kind::Keyword, elem.text));
          node->keyword_flags[elem.text] = true;
        }
        continue;
      }
      // nonterminal reference
      const std::string slot = lf.ref_slots.count(&elem) ? lf.ref_slots.at(&elem) : elem.target;
      if (elem.target == "Name") {
        const Node& tfi = child.node();
        std::vector<const Node*> idents;
        for (const auto& c : tfi.children)
          if (c.is_node()) idents.push_back(&c.node());
        const Node& ident = tfi.alt == 0 ? *idents.front() : *idents.back();
        NameConstraint nc;
        for (const auto& c : ident.children) {
          if (c.is_node()) continue;
          nc.kind = c.token().kind == Token::Kind::SchemaVar
                        ? (c.token().text == "$_" ? NameConstraintKind::Wildcard
                                                  : NameConstraintKind::Var)
                        : NameConstraintKind::Literal;
          nc.text = c.token().text;
        }
        node->add_token(slot, make_token(Token::Kind::Name, resolve_name(nc)));
        continue;
      }
      if (is_builtin_lexical_name(elem.target)) continue;
      if (auto sub = instantiate(child.node())) node->add_node(slot, std::move(sub));
    }
    return node;
  }

  // --- positions within a production body ----------------------------------

  const RhsExpr* find_slot_elem(const RhsExpr& alt, const std::string& slot) {
    const RhsExpr* hit = nullptr;
    std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
      if (hit) return;
      if (e.kind == RhsExpr::Kind::NontermRef && lf.ref_slots.count(&e) &&
          lf.ref_slots.at(&e) == slot) {
        hit = &e;
        return;
      }
      for (const auto& c : e.children) walk(c);
    };
    walk(alt);
    return hit;
  }

  // Synthesizes the minimal children for one group alternative.
  void materialize_alt(const RhsExpr& alt, std::vector<Node::Child>& out_children) {
    for (const auto& e : alt.children) {
      switch (e.kind) {
        case RhsExpr::Kind::Terminal: {
          Node::Child c;
          c.slot = "";
          c.value = make_token(ident_shaped_text(e.text) ? Token::Kind::Keyword
                                                         : Token::Kind::Symbol,
                               e.text);
          out_children.push_back(std::move(c));
          break;
        }
        case RhsExpr::Kind::OptionalKeyword:
          break;
        case RhsExpr::Kind::NontermRef:
        case RhsExpr::Kind::Group:
          if (e.card == Card::Opt || e.card == Card::Star) break;
          throw ApplyError("cannot materialize mandatory syntax for insertion");
        default:
          break;
      }
    }
  }

  // Insertion index for new children in `slot` of `node`, switching in the
  // group alternative that carries the slot when the matched alternative
  // lacks it (a member added to a body-less class).
  size_t insertion_index(Node& node, const std::string& slot) {
    const Production* lp = l.find(node.type);
    if (!lp || lp->kind != ProdKind::Standard)
      throw ApplyError("cannot insert into node of type '" + node.type + "'");
    const RhsExpr& alt = lp->body->children[static_cast<size_t>(node.alt)];
    const RhsExpr* target = find_slot_elem(alt, slot);
    if (!target) throw ApplyError("production '" + node.type + "' has no slot '" + slot + "'");

    auto asg = align::align_children(alt, node.children, 0, node.children.size(), l_matcher);
    if (!asg) throw ApplyError("children of '" + node.type + "' do not align with its body");
    auto order = align::element_order(alt);

    // direct hit: after the last child consumed by the slot's element
    int last = -1;
    for (const auto& [idx, e] : asg->elem_of)
      if (e == target) last = std::max(last, idx);
    if (last >= 0) return static_cast<size_t>(last) + 1;

    // group-path check: every group ancestor of the target must have its
    // alternative chosen; otherwise replace the group's children
    std::function<const RhsExpr*(const RhsExpr&, const RhsExpr*)> group_of =
        [&](const RhsExpr& e, const RhsExpr* current) -> const RhsExpr* {
      if (&e == target) return current;
      for (const auto& c : e.children) {
        const RhsExpr* next = e.kind == RhsExpr::Kind::Group ? &e : current;
        if (const RhsExpr* hit = group_of(c, next)) return hit;
      }
      return nullptr;
    };
    const RhsExpr* group = group_of(alt, nullptr);
    if (group) {
      const RhsExpr* chosen_alt = nullptr;
      const RhsExpr* needed_alt = nullptr;
      for (const auto& galt : group->children.front().children) {
        bool contains_target = find_slot_elem(galt, slot) == target;
        bool used = false;
        for (const auto& [idx, e] : asg->elem_of) {
          std::function<bool(const RhsExpr&)> within = [&](const RhsExpr& x) {
            if (&x == e) return true;
            for (const auto& c : x.children)
              if (within(c)) return true;
            return false;
          };
          if (within(galt)) used = true;
        }
        if (contains_target) needed_alt = &galt;
        if (used) chosen_alt = &galt;
      }
      if (needed_alt && chosen_alt && needed_alt != chosen_alt) {
        // drop the chosen alternative's children, synthesize the needed one
        std::vector<bool> drop(node.children.size(), false);
        int lo = static_cast<int>(node.children.size());
        for (const auto& [idx, e] : asg->elem_of) {
          std::function<bool(const RhsExpr&)> within = [&](const RhsExpr& x) {
            if (&x == e) return true;
            for (const auto& c : x.children)
              if (within(c)) return true;
            return false;
          };
          if (within(*chosen_alt)) {
            drop[static_cast<size_t>(idx)] = true;
            lo = std::min(lo, idx);
          }
        }
        std::vector<Node::Child> fresh;
        materialize_alt(*needed_alt, fresh);
        std::vector<Node::Child> rebuilt;
        for (size_t i = 0; i < node.children.size(); ++i) {
          if (static_cast<int>(i) == lo)
            for (auto& f : fresh) rebuilt.push_back(std::move(f));
          if (!drop[i]) rebuilt.push_back(std::move(node.children[i]));
        }
        if (lo == static_cast<int>(node.children.size()))
          for (auto& f : fresh) rebuilt.push_back(std::move(f));
        node.children = std::move(rebuilt);
        return insertion_index(node, slot);
      }
    }

    // empty region on the chosen path: first child after the element's place
    int target_order = order.at(target);
    for (size_t i = 0; i < node.children.size(); ++i) {
      auto it = asg->elem_of.find(static_cast<int>(i));
      if (it == asg->elem_of.end()) continue;
      if (order.at(it->second) > target_order) return i;
    }
    return node.children.size();
  }

  void insert_child(Node& parent, size_t index, const std::string& slot,
                    std::unique_ptr<Node> child) {
    Node::Child c;
    c.slot = slot;
    c.value = std::move(child);
    parent.children.insert(parent.children.begin() + static_cast<long>(index), std::move(c));
  }

  static void detach(Node& parent, const Node* child) {
    for (size_t i = 0; i < parent.children.size(); ++i) {
      if (parent.children[i].is_node() && &parent.children[i].node() == child) {
        parent.children.erase(parent.children.begin() + static_cast<long>(i));
        return;
      }
    }
  }

  // --- edit phases ----------------------------------------------------------

  void delete_phase() {
    for (const auto& e : ir.edits) {
      if (e.kind != Edit::Kind::Replace || e.lhs_node < 0 || e.rhs) continue;
      Node* victim = bound_in_out(e.lhs_node);
      if (!victim || !victim->parent) continue;
      detach(*victim->parent, victim);
    }
  }

  // top-level creations go into the first repeated slot of the root that
  // accepts the created type
  std::pair<Node*, std::string> top_level_target(const std::string& type) {
    Node& root = out.root();
    const Production* lp = l.find(root.type);
    const RhsExpr& alt = lp->body->children[static_cast<size_t>(root.alt)];
    std::pair<Node*, std::string> result{nullptr, ""};
    std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
      if (result.first) return;
      if (e.kind == RhsExpr::Kind::NontermRef &&
          (e.card == Card::Star || e.card == Card::Plus) &&
          !is_builtin_lexical_name(e.target) && type_matches(lf, e.target, type)) {
        result = {&root, lf.ref_slots.at(&e)};
        return;
      }
      for (const auto& c : e.children) walk(c);
    };
    walk(alt);
    if (!result.first)
      throw ApplyError("model root has no repeated slot accepting '" + type + "'");
    return result;
  }

  void insert_phase() {
    for (const auto& e : ir.edits) {
      if (e.kind != Edit::Kind::Replace || !e.rhs) continue;
      auto fresh = instantiate(*e.rhs->syntax);
      if (!fresh) continue;
      if (e.lhs_node >= 0) {
        Node* old = bound_in_out(e.lhs_node);
        if (!old || !old->parent) continue;
        Node* parent = old->parent;
        for (auto& c : parent->children) {
          if (c.is_node() && &c.node() == old) {
            std::string slot = c.slot;
            c.value = std::move(fresh);
            c.slot = slot;
            break;
          }
        }
        continue;
      }
      Node* parent;
      std::string slot = e.slot;
      if (e.anchor >= 0) {
        parent = bound_in_out(e.anchor);
        if (!parent) continue;
      } else {
        auto [p, s] = top_level_target(e.rhs->type);
        parent = p;
        slot = s;
      }
      size_t idx = insertion_index(*parent, slot);
      insert_child(*parent, idx, slot, std::move(fresh));
    }
  }

  void keyword_phase() {
    for (const auto& e : ir.edits) {
      if (e.kind != Edit::Kind::KeywordAdd && e.kind != Edit::Kind::KeywordRemove) continue;
      Node* node = bound_in_out(e.anchor);
      if (!node) continue;
      if (e.kind == Edit::Kind::KeywordRemove) {
        for (size_t i = 0; i < node->children.size(); ++i) {
          const auto& c = node->children[i];
          if (!c.is_node() && c.token().kind == Token::Kind::Keyword &&
              c.token().text == e.keyword) {
            node->children.erase(node->children.begin() + static_cast<long>(i));
            break;
          }
        }
        node->keyword_flags[e.keyword] = false;
        continue;
      }
      size_t idx = keyword_insertion_index(*node, e.keyword);
      Node::Child c;
      c.slot = "";
      c.value = make_token(Token::Kind::Keyword, e.keyword);
      node->children.insert(node->children.begin() + static_cast<long>(idx), std::move(c));
      node->keyword_flags[e.keyword] = true;
    }
  }

  size_t keyword_insertion_index(Node& node, const std::string& kw) {
    const Production* lp = l.find(node.type);
    const RhsExpr& alt = lp->body->children[static_cast<size_t>(node.alt)];
    auto asg = align::align_children(alt, node.children, 0, node.children.size(), l_matcher);
    if (!asg) throw ApplyError("children of '" + node.type + "' do not align with its body");
    auto order = align::element_order(alt);

    std::set<const RhsExpr*> used;
    for (const auto& [idx, e] : asg->elem_of) used.insert(e);
    const RhsExpr* target = nullptr;
    std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
      if (target) return;
      if (e.kind == RhsExpr::Kind::OptionalKeyword && e.text == kw && !used.count(&e)) {
        target = &e;
        return;
      }
      for (const auto& c : e.children) walk(c);
    };
    walk(alt);
    if (!target)
      throw ApplyError("alternative of '" + node.type + "' has no free keyword '" + kw + "'");
    int target_order = order.at(target);
    for (size_t i = 0; i < node.children.size(); ++i) {
      auto it = asg->elem_of.find(static_cast<int>(i));
      if (it == asg->elem_of.end()) continue;
      if (order.at(it->second) > target_order) return i;
    }
    return node.children.size();
  }

  void name_phase() {
    for (const auto& e : ir.edits) {
      if (e.kind != Edit::Kind::NameReplace) continue;
      Node* node = bound_in_out(e.anchor);
      if (!node) continue;
      int seen = 0;
      for (auto& c : node->children) {
        if (c.is_node() || c.slot != e.name_slot) continue;
        if (seen++ != e.name_occurrence) continue;
        std::get<1>(c.value).text = resolve_name(e.name_to);
        break;
      }
    }
  }
};

}  // namespace

SyntaxTree apply_match(const RuleIR& ir, const SyntaxTree& model, const Match& m) {
  SyntaxTree out = model.clone();
  Applier ap(ir, model, out, m);
  ap.delete_phase();
  ap.insert_phase();
  ap.keyword_phase();
  ap.name_phase();
  out.refresh_parents();
  return out;
}

ApplyResult apply(const RuleIR& ir, const SyntaxTree& model, ApplyMode mode, int max_iter) {
  SearchPlan plan = compile_search_plan(ir);
  ApplyResult res{model.clone(), 0};
  for (;;) {
    auto matches = find_matches(plan, res.model, ir);
    if (matches.empty()) break;
    if (res.applications >= max_iter)
      throw GuardError("exceeded " + std::to_string(max_iter) + " rule applications");
    res.model = apply_match(ir, res.model, matches.front());
    ++res.applications;
    if (mode == ApplyMode::Once) break;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

struct BruteForce {
  const RuleIR& ir;
  const SyntaxTree& model;
  const GrammarFacts& lf;
  std::vector<const Node*> nodes;  // document order

  BruteForce(const RuleIR& ir_, const SyntaxTree& model_)
      : ir(ir_), model(model_), lf(ir_.lang_facts()) {
    std::function<void(const Node&)> walk = [&](const Node& n) {
      nodes.push_back(&n);
      for (const auto& c : n.children)
        if (c.is_node()) walk(c.node());
    };
    walk(model.root());
  }

  bool typed(const PatternNode& p, const Node& n) const {
    return p.type == n.type || lf.concrete_types(p.type).count(n.type) != 0;
  }

  // containment, names and keywords of one graph under one assignment;
  // extends env with name and element variables
  bool graph_ok(const PatternGraph& g, const std::map<int, const Node*>& asg,
                const Node* anchor, const std::string& anchor_slot,
                std::map<std::string, ExprValue>& env) const {
    for (const auto& p : g.nodes) {
      const Node* n = asg.at(p.id);
      if (!typed(p, *n)) return false;
      const Node* expected_parent = nullptr;
      std::string expected_slot;
      if (p.parent >= 0) {
        expected_parent = asg.at(p.parent);
        expected_slot = p.slot;
      } else if (anchor) {
        expected_parent = anchor;
        expected_slot = anchor_slot;
      }
      if (expected_parent) {
        bool found = false;
        for (const auto& c : expected_parent->children)
          if (c.is_node() && &c.node() == n && c.slot == expected_slot) found = true;
        if (!found) return false;
      }
      for (const auto& [kw, req] : p.keyword_constraints)
        if (!keyword_ok(*n, kw, req)) return false;
      std::map<std::string, int> occ;
      for (const auto& [slot, nc] : p.name_constraints) {
        const Token* tok = name_token_at(*n, slot, occ[slot]++);
        if (!tok) return false;
        if (nc.kind == NameConstraintKind::Literal && tok->text != nc.text) return false;
        if (nc.kind == NameConstraintKind::Var) {
          auto it = env.find(nc.text);
          if (it != env.end()) {
            if (!(it->second == ExprValue::string(tok->text))) return false;
          } else {
            env[nc.text] = ExprValue::string(tok->text);
          }
        }
      }
      if (!p.var.empty()) {
        auto it = env.find(p.var);
        if (it != env.end()) {
          if (!(it->second == ExprValue::node(n->id))) return false;
        } else {
          env[p.var] = ExprValue::node(n->id);
        }
      }
    }
    return true;
  }

  bool enumerate(const PatternGraph& g, size_t next, std::map<int, const Node*>& asg,
                 const std::set<const Node*>& excluded,
                 const std::function<bool(std::map<int, const Node*>&)>& done) const {
    if (next == g.nodes.size()) return done(asg);
    for (const Node* cand : nodes) {
      if (excluded.count(cand)) continue;
      bool taken = false;
      for (const auto& [id, n] : asg) taken = taken || n == cand;
      if (taken) continue;
      asg[g.nodes[next].id] = cand;
      if (enumerate(g, next + 1, asg, excluded, done)) return true;
      asg.erase(g.nodes[next].id);
    }
    return false;
  }

  std::vector<Match> all_matches() const {
    std::vector<Match> out;
    EvalContext ctx{&model};
    std::map<int, const Node*> asg;
    enumerate(ir.lhs, 0, asg, {}, [&](std::map<int, const Node*>& complete) {
      std::map<std::string, ExprValue> env;
      if (!graph_ok(ir.lhs, complete, nullptr, "", env)) return false;
      // NACs: no injective extension onto nodes outside the positive match
      std::set<const Node*> positive;
      for (const auto& [id, n] : complete) positive.insert(n);
      for (size_t i = 0; i < ir.nacs.size(); ++i) {
        const Nac& nac = ir.nacs[i];
        const Node* anchor = nac.anchor >= 0 ? complete.at(nac.anchor) : nullptr;
        std::map<int, const Node*> nasg;
        bool exists = enumerate(nac.graph, 0, nasg, positive,
                                [&](std::map<int, const Node*>& nc) {
                                  auto nenv = env;
                                  return graph_ok(nac.graph, nc, anchor, nac.slot, nenv);
                                });
        if (exists) return false;
      }
      Binding b;
      for (const auto& [id, n] : complete) b.node_binding[id] = n->id;
      b.var_env = env;
      try {
        auto [extended, ok] = run_where(ir.where, b, ctx);
        if (ok) out.push_back(Match{std::move(extended)});
      } catch (const EvalError&) {
        throw;
      }
      return false;
    });
    return out;
  }
};

}  // namespace

std::vector<Match> brute_force_matches(const RuleIR& ir, const SyntaxTree& model,
                                       int node_budget) {
  if (model.node_count() > node_budget)
    throw Error("model exceeds the brute-force node budget of " + std::to_string(node_budget));
  BruteForce bf(ir, model);
  return bf.all_matches();
}

}  // namespace dstl
