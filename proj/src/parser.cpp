// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/parser.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <tuple>

namespace dstl {
namespace detail {

enum class SymKind { Literal, Builtin, ProdNT, IfaceNT, SynthNT };

struct SymInfo {
  SymKind kind;
  std::string text;  // literal text or nonterminal name
  Token::Kind builtin = Token::Kind::Name;
};

struct RuleElem {
  int sym;
  std::string slot;
};

struct Rule {
  enum class Origin { ProdAlt, Iface, Synth, KwSome, KwNone };
  int lhs;
  std::vector<RuleElem> rhs;
  Origin origin = Origin::Synth;
  const Production* prod = nullptr;
  int alt = 0;
  std::string keyword;
};

struct CompiledGrammar {
  std::vector<SymInfo> syms;
  std::map<std::string, int> literal_ids;
  std::map<std::string, int> nonterm_ids;  // production names
  std::vector<Rule> rules;
  std::map<int, std::vector<int>> rules_of;
  std::map<std::string, std::set<std::string>> keywords_of;

  int builtin_name = -1, builtin_schema = -1, builtin_string = -1;

  int add_sym(SymInfo info) {
    syms.push_back(std::move(info));
    return static_cast<int>(syms.size()) - 1;
  }

  int literal(const std::string& text) {
    auto it = literal_ids.find(text);
    if (it != literal_ids.end()) return it->second;
    int id = add_sym({SymKind::Literal, text});
    literal_ids[text] = id;
    return id;
  }

  int synth(const std::string& name) { return add_sym({SymKind::SynthNT, name}); }

  void add_rule(Rule r) {
    rules_of[r.lhs].push_back(static_cast<int>(rules.size()));
    rules.push_back(std::move(r));
  }

  int resolve(const std::string& target) const {
    if (target == "Name") return builtin_name;
    if (target == "SchemaVar") return builtin_schema;
    if (target == "String") return builtin_string;
    auto it = nonterm_ids.find(target);
    if (it == nonterm_ids.end())
      throw GrammarError("unresolved nonterminal '" + target + "'");
    return it->second;
  }
};

namespace {

struct Compiler {
  const Grammar& g;
  const GrammarFacts& facts;
  CompiledGrammar& out;
  int synth_count = 0;

  std::string fresh(const std::string& base) {
    return base + "%" + std::to_string(synth_count++);
  }

  RuleElem compile_element(const RhsExpr& e, const Production& prod);

  std::vector<RuleElem> compile_sequence(const RhsExpr& seq, const Production& prod) {
    std::vector<RuleElem> out_elems;
    for (const auto& c : seq.children) out_elems.push_back(compile_element(c, prod));
    return out_elems;
  }

  RuleElem wrap_card(RuleElem base, Card card, const std::string& ctx) {
    if (card == Card::One) return base;
    if (card == Card::Opt) {
      int o = out.synth(fresh(ctx + "?"));
      Rule some;
      some.lhs = o;
      some.rhs = {base};
      out.add_rule(std::move(some));
      Rule none;
      none.lhs = o;
      out.add_rule(std::move(none));
      return {o, ""};
    }
    // star and plus share a right-recursive list helper
    int s = out.synth(fresh(ctx + "*"));
    Rule cons;
    cons.lhs = s;
    cons.rhs = {base, {s, ""}};
    out.add_rule(std::move(cons));
    Rule nil;
    nil.lhs = s;
    out.add_rule(std::move(nil));
    if (card == Card::Star) return {s, ""};
    int p = out.synth(fresh(ctx + "+"));
    Rule head;
    head.lhs = p;
    head.rhs = {base, {s, ""}};
    out.add_rule(std::move(head));
    return {p, ""};
  }

  void compile_production(const Production& p) {
    if (p.kind == ProdKind::LexicalBuiltin) return;
    int lhs = out.nonterm_ids.at(p.name);
    if (p.kind == ProdKind::Interface) {
      auto it = facts.implementors.find(p.name);
      if (it == facts.implementors.end()) return;
      for (const auto& impl : it->second) {
        Rule r;
        r.lhs = lhs;
        r.rhs = {{out.nonterm_ids.at(impl), ""}};
        r.origin = Rule::Origin::Iface;
        out.add_rule(std::move(r));
      }
      return;
    }
    int alt_idx = 0;
    for (const auto& alt : p.body->children) {
      Rule r;
      r.lhs = lhs;
      r.rhs = compile_sequence(alt, p);
      r.origin = Rule::Origin::ProdAlt;
      r.prod = &p;
      r.alt = alt_idx++;
      out.add_rule(std::move(r));
    }
  }
};

RuleElem Compiler::compile_element(const RhsExpr& e, const Production& prod) {
  switch (e.kind) {
    case RhsExpr::Kind::Terminal:
      return {out.literal(e.text), ""};
    case RhsExpr::Kind::OptionalKeyword: {
      int h = out.synth(fresh(prod.name + "%kw_" + e.text));
      Rule some;
      some.lhs = h;
      some.rhs = {{out.literal(e.text), ""}};
      some.origin = Rule::Origin::KwSome;
      some.keyword = e.text;
      out.add_rule(std::move(some));
      Rule none;
      none.lhs = h;
      none.origin = Rule::Origin::KwNone;
      none.keyword = e.text;
      out.add_rule(std::move(none));
      return {h, ""};
    }
    case RhsExpr::Kind::NontermRef: {
      auto slot_it = facts.ref_slots.find(&e);
      std::string slot = slot_it != facts.ref_slots.end() ? slot_it->second : e.target;
      return wrap_card({out.resolve(e.target), slot}, e.card, prod.name);
    }
    case RhsExpr::Kind::Group: {
      int gsym = out.synth(fresh(prod.name + "%g"));
      for (const auto& alt : e.children.front().children) {
        Rule r;
        r.lhs = gsym;
        r.rhs = compile_sequence(alt, prod);
        out.add_rule(std::move(r));
      }
      return wrap_card({gsym, ""}, e.card, prod.name);
    }
    default:
      throw GrammarError("unexpected expression in compiled body");
  }
}

std::unique_ptr<CompiledGrammar> compile(const Grammar& g, const GrammarFacts& facts) {
  auto cg = std::make_unique<CompiledGrammar>();
  cg->builtin_name = cg->add_sym({SymKind::Builtin, "Name", Token::Kind::Name});
  cg->builtin_schema = cg->add_sym({SymKind::Builtin, "SchemaVar", Token::Kind::SchemaVar});
  cg->builtin_string = cg->add_sym({SymKind::Builtin, "String", Token::Kind::String});
  for (const auto& p : g.productions) {
    if (p.kind == ProdKind::LexicalBuiltin) continue;
    SymKind k = p.kind == ProdKind::Interface ? SymKind::IfaceNT : SymKind::ProdNT;
    cg->nonterm_ids[p.name] = cg->add_sym({k, p.name});
  }
  Compiler c{g, facts, *cg};
  for (const auto& p : g.productions) c.compile_production(p);
  cg->keywords_of = facts.keywords_of;
  return cg;
}

// ---------------------------------------------------------------------------
// Earley engine
// ---------------------------------------------------------------------------

struct EarleyRun {
  const CompiledGrammar& cg;
  const std::vector<Token>& toks;
  int n;

  std::vector<std::vector<std::tuple<int, int, int>>> chart;  // (rule, dot, origin)
  std::vector<std::set<std::tuple<int, int, int>>> seen;
  std::map<std::pair<int, int>, std::set<int>> ends;  // (sym, origin) -> end positions
  std::vector<std::set<int>> completed_empty;         // position -> syms completed empty
  int furthest = 0;

  EarleyRun(const CompiledGrammar& cg_, const std::vector<Token>& toks_)
      : cg(cg_), toks(toks_), n(static_cast<int>(toks_.size())) {
    chart.resize(n + 1);
    seen.resize(n + 1);
    completed_empty.resize(n + 1);
  }

  bool token_matches(int sym, int pos) const {
    if (pos >= n) return false;
    const SymInfo& si = cg.syms[sym];
    const Token& t = toks[pos];
    if (si.kind == SymKind::Literal)
      return (t.kind == Token::Kind::Keyword || t.kind == Token::Kind::Symbol) &&
             t.text == si.text;
    if (si.kind == SymKind::Builtin) return t.kind == si.builtin;
    return false;
  }

  void add(int pos, int rule, int dot, int origin) {
    if (seen[pos].insert({rule, dot, origin}).second)
      chart[pos].push_back({rule, dot, origin});
  }

  void predict_start(int sym) {
    auto it = cg.rules_of.find(sym);
    if (it == cg.rules_of.end()) return;
    for (int r : it->second) add(0, r, 0, 0);
  }

  void run(int start_sym) {
    predict_start(start_sym);
    for (int pos = 0; pos <= n; ++pos) {
      for (size_t idx = 0; idx < chart[pos].size(); ++idx) {
        auto [r, d, o] = chart[pos][idx];
        const Rule& rule = cg.rules[r];
        if (d < static_cast<int>(rule.rhs.size())) {
          int sym = rule.rhs[d].sym;
          const SymInfo& si = cg.syms[sym];
          if (si.kind == SymKind::Literal || si.kind == SymKind::Builtin) {
            if (token_matches(sym, pos)) {
              add(pos + 1, r, d + 1, o);
              furthest = std::max(furthest, pos + 1);
            }
          } else {
            auto it = cg.rules_of.find(sym);
            if (it != cg.rules_of.end())
              for (int r2 : it->second) add(pos, r2, 0, pos);
            if (completed_empty[pos].count(sym)) add(pos, r, d + 1, o);
          }
        } else {
          ends[{rule.lhs, o}].insert(pos);
          if (o == pos) completed_empty[pos].insert(rule.lhs);
          for (size_t k = 0; k < chart[o].size(); ++k) {
            auto [r2, d2, o2] = chart[o][k];
            const Rule& rule2 = cg.rules[r2];
            if (d2 < static_cast<int>(rule2.rhs.size()) && rule2.rhs[d2].sym == rule.lhs)
              add(pos, r2, d2 + 1, o2);
          }
        }
      }
    }
  }

  bool recognized(int start_sym) const {
    auto it = ends.find({start_sym, 0});
    return it != ends.end() && it->second.count(n) != 0;
  }
};

// ---------------------------------------------------------------------------
// Canonical tree extraction
// ---------------------------------------------------------------------------

struct BuildItem {
  bool is_flag = false;
  Node::Child child;      // valid when !is_flag
  std::string keyword;    // valid when is_flag
  bool present = false;
};

struct Builder {
  const CompiledGrammar& cg;
  const EarleyRun& run;
  std::string_view text;
  int next_id = 0;
  std::map<std::tuple<int, int, int, int>, bool> feasible_memo;
  std::set<std::tuple<int, int, int>> building;

  // Candidate end positions for one rule element starting at pos, descending.
  std::vector<int> candidate_ends(const RuleElem& elem, int pos) const {
    const SymInfo& si = cg.syms[elem.sym];
    if (si.kind == SymKind::Literal || si.kind == SymKind::Builtin) {
      if (run.token_matches(elem.sym, pos)) return {pos + 1};
      return {};
    }
    auto it = run.ends.find({elem.sym, pos});
    if (it == run.ends.end()) return {};
    return std::vector<int>(it->second.rbegin(), it->second.rend());
  }

  bool feasible(int rule, int dot, int i, int j) {
    const Rule& r = cg.rules[rule];
    if (dot == static_cast<int>(r.rhs.size())) return i == j;
    auto key = std::make_tuple(rule, dot, i, j);
    auto it = feasible_memo.find(key);
    if (it != feasible_memo.end()) return it->second;
    feasible_memo[key] = false;  // cycle-safe default while computing
    bool ok = false;
    for (int e : candidate_ends(r.rhs[dot], i)) {
      if (e > j) continue;
      if (feasible(rule, dot + 1, e, j)) {
        ok = true;
        break;
      }
    }
    feasible_memo[key] = ok;
    return ok;
  }

  Span span_of(int i, int j) const {
    if (i < j) return {run.toks[i].span.begin, run.toks[j - 1].span.end};
    int off = i < run.n ? run.toks[i].span.begin : static_cast<int>(text.size());
    return {off, off};
  }

  std::vector<BuildItem> build_rule(int rule, int i, int j) {
    const Rule& r = cg.rules[rule];
    std::vector<BuildItem> items;
    int pos = i;
    for (int d = 0; d < static_cast<int>(r.rhs.size()); ++d) {
      const RuleElem& elem = r.rhs[d];
      int chosen = -1;
      for (int e : candidate_ends(elem, pos)) {
        if (e > j) continue;
        if (feasible(rule, d + 1, e, j)) {
          chosen = e;
          break;
        }
      }
      if (chosen < 0) throw ParseError("internal: no feasible split during extraction");
      const SymInfo& si = cg.syms[elem.sym];
      if (si.kind == SymKind::Literal || si.kind == SymKind::Builtin) {
        BuildItem it;
        it.child.slot = elem.slot;
        it.child.value = run.toks[pos];
        items.push_back(std::move(it));
      } else {
        auto sub = build_sym(elem.sym, pos, chosen);
        if (si.kind == SymKind::ProdNT || si.kind == SymKind::IfaceNT) {
          for (auto& s : sub)
            if (!s.is_flag && s.child.is_node()) s.child.slot = elem.slot;
        }
        for (auto& s : sub) items.push_back(std::move(s));
      }
      pos = chosen;
    }
    return items;
  }

  std::vector<BuildItem> build_sym(int sym, int i, int j) {
    auto key = std::make_tuple(sym, i, j);
    if (!building.insert(key).second)
      throw GuardError("cyclic derivation during tree extraction");
    auto rules_it = cg.rules_of.find(sym);
    auto ends_it = run.ends.find({sym, i});
    std::vector<BuildItem> result;
    bool done = false;
    if (rules_it != cg.rules_of.end() && ends_it != run.ends.end() &&
        ends_it->second.count(j)) {
      for (int r : rules_it->second) {
        if (!feasible(r, 0, i, j)) continue;
        result = assemble(r, i, j);
        done = true;
        break;
      }
    }
    building.erase(key);
    if (!done) throw ParseError("internal: no rule derived symbol during extraction");
    return result;
  }

  std::vector<BuildItem> assemble(int rule, int i, int j) {
    const Rule& r = cg.rules[rule];
    std::vector<BuildItem> items = build_rule(rule, i, j);
    switch (r.origin) {
      case Rule::Origin::ProdAlt: {
        auto node = std::make_unique<Node>();
        node->id = next_id++;
        node->type = r.prod->name;
        node->alt = r.alt;
        node->span = span_of(i, j);
        auto kws = cg.keywords_of.find(r.prod->name);
        if (kws != cg.keywords_of.end())
          for (const auto& kw : kws->second) node->keyword_flags[kw] = false;
        for (auto& it : items) {
          if (it.is_flag) {
            if (it.present) node->keyword_flags[it.keyword] = true;
            continue;
          }
          if (it.child.is_node())
            node->add_node(it.child.slot, std::move(std::get<0>(it.child.value)));
          else
            node->add_token(it.child.slot, it.child.token());
        }
        std::vector<BuildItem> out;
        BuildItem wrapped;
        wrapped.child.slot = "";
        wrapped.child.value = std::move(node);
        out.push_back(std::move(wrapped));
        return out;
      }
      case Rule::Origin::KwSome: {
        BuildItem flag;
        flag.is_flag = true;
        flag.keyword = r.keyword;
        flag.present = true;
        items.push_back(std::move(flag));
        return items;
      }
      case Rule::Origin::KwNone: {
        std::vector<BuildItem> out;
        BuildItem flag;
        flag.is_flag = true;
        flag.keyword = r.keyword;
        flag.present = false;
        out.push_back(std::move(flag));
        return out;
      }
      case Rule::Origin::Iface:
      case Rule::Origin::Synth:
        return items;
    }
    return items;
  }
};

}  // namespace
}  // namespace detail

Parser::Parser(const Grammar& g, const GrammarFacts& facts)
    : g_(g), facts_(facts), lex_(build_lexer(g)), compiled_(detail::compile(g, facts)) {}

Parser::~Parser() = default;

SyntaxTree Parser::parse(std::string_view text, const std::string& start) const {
  auto toks = lex(lex_, text);
  int start_sym;
  try {
    start_sym = compiled_->resolve(start);
  } catch (const GrammarError&) {
    throw ParseError("unknown start nonterminal '" + start + "'");
  }
  const auto& si = compiled_->syms[start_sym];
  if (si.kind == detail::SymKind::Builtin)
    throw ParseError("cannot parse with lexical builtin start '" + start + "'");

  detail::EarleyRun run(*compiled_, toks);
  run.run(start_sym);
  if (!run.recognized(start_sym)) {
    int p = run.furthest;
    std::string msg;
    Span sp;
    if (p < run.n) {
      sp = toks[p].span;
      msg = at(text, sp.begin, "no parse for '" + start + "': unexpected '" + toks[p].text +
                                   "' (furthest progress)");
    } else {
      sp = {static_cast<int>(text.size()), static_cast<int>(text.size())};
      msg = at(text, sp.begin, "no parse for '" + start + "': unexpected end of input");
    }
    throw ParseError(msg, sp);
  }

  detail::Builder builder{*compiled_, run, text, 0, {}, {}};
  auto items = builder.build_sym(start_sym, 0, run.n);
  std::unique_ptr<Node> root;
  for (auto& it : items) {
    if (it.is_flag || !it.child.is_node()) continue;
    if (root) throw GuardError("ambiguous root during extraction");
    root = std::move(std::get<0>(it.child.value));
  }
  if (!root) throw ParseError("internal: extraction produced no root node");
  return SyntaxTree(std::move(root), builder.next_id);
}

bool Parser::recognizes(std::string_view text, const std::string& start) const {
  std::vector<Token> toks;
  try {
    toks = lex(lex_, text);
  } catch (const LexError&) {
    return false;
  }
  int start_sym = compiled_->resolve(start);
  detail::EarleyRun run(*compiled_, toks);
  run.run(start_sym);
  return run.recognized(start_sym);
}

}  // namespace dstl
