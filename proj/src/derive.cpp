// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/derive.hpp"

#include <cctype>
#include <sstream>

namespace dstl {

namespace {

const char* kTfCommonsSource = R"mc(grammar TFCommons extends Common {

  TfIdentifier =
    Ident | "[[" Ident ":-" rhs:Ident "]]";

  Ident = Name | SchemaVar;

  Where = "where" "{" Assignment* constraint:BooleanExpression? "}";

  Assignment = SchemaVar "=" value:Expression ";";

  Expression = OrExpression;

  BooleanExpression = OrExpression;

  OrExpression = AndExpression ("||" AndExpression)*;

  AndExpression = EqualityExpression ("&&" EqualityExpression)*;

  EqualityExpression = UnaryExpression (("==" | "!=") UnaryExpression)?;

  UnaryExpression = "!" UnaryExpression | PostfixExpression;

  PostfixExpression = PrimaryExpression ("." Name "(" Arguments? ")")*;

  PrimaryExpression = String | SchemaVar | callee:Name "(" Arguments? ")" | "(" Expression ")";

  Arguments = Expression ("," Expression)*;
}
)mc";

bool word_shaped(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

}  // namespace

const Grammar& tfcommons_grammar() {
  static const Grammar g = parse_grammar(kTfCommonsSource);
  return g;
}

std::string keyword_interface_name(const std::string& keyword) {
  static const std::map<std::string, std::string> symbol_table = {
      {"+", "Plus"}, {"-", "Minus"}, {"*", "Star"}, {"/", "Slash"}};
  auto it = symbol_table.find(keyword);
  if (it != symbol_table.end()) return it->second;
  if (word_shaped(keyword)) {
    std::string name = keyword;
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
  }
  std::ostringstream hex;
  hex << "Sym";
  for (unsigned char c : keyword) {
    static const char* digits = "0123456789ABCDEF";
    hex << digits[c >> 4] << digits[c & 0xF];
  }
  return hex.str();
}

std::map<std::string, std::string> keyword_names(const Grammar& g, const GrammarFacts& facts) {
  std::set<std::string> taken;
  for (const auto& p : g.productions) taken.insert(p.name);
  std::map<std::string, std::string> out;
  for (const auto& kw : facts.keyword_order) {
    std::string name = keyword_interface_name(kw);
    if (taken.count(name)) name += "Keyword";
    if (taken.count(name))
      throw DeriveError("keyword '" + kw + "' clashes with nonterminal '" + name +
                        "' even with Keyword suffix");
    taken.insert(name);
    out[kw] = name;
  }
  return out;
}

namespace {

struct DeriveCtx {
  const Grammar& g;
  const GrammarFacts& facts;
  std::map<std::string, std::string> kw_names;

  DeriveCtx(const Grammar& g_, const GrammarFacts& f_)
      : g(g_), facts(f_), kw_names(keyword_names(g_, f_)) {}

  std::vector<const Production*> nonterminals() const {
    std::vector<const Production*> out;
    for (const auto& p : g.productions)
      if (p.kind != ProdKind::LexicalBuiltin) out.push_back(&p);
    return out;
  }

  // Rule 4a SyntaxOfN: optional keywords become optional interface refs,
  // Name references become TfIdentifier, other references stay.
  RhsExpr transform_syntax(const RhsExpr& e) const {
    RhsExpr out = e;
    switch (e.kind) {
      case RhsExpr::Kind::OptionalKeyword:
        return RhsExpr::ref(kw_names.at(e.text), Card::Opt);
      case RhsExpr::Kind::NontermRef:
        if (e.target == "Name") out.target = "TfIdentifier";
        return out;
      default:
        break;
    }
    out.children.clear();
    for (const auto& c : e.children) out.children.push_back(transform_syntax(c));
    return out;
  }
};

Production make_interface(const std::string& name, std::vector<std::string> extends) {
  Production p;
  p.name = name;
  p.kind = ProdKind::Interface;
  p.implements_list = std::move(extends);
  p.origin_grammar = "derived";
  return p;
}

Production make_production(const std::string& name, const std::string& implements,
                           std::vector<RhsExpr> alts) {
  Production p;
  p.name = name;
  p.kind = ProdKind::Standard;
  if (!implements.empty()) p.implements_list.push_back(implements);
  p.body = RhsExpr::alternative(std::move(alts));
  p.origin_grammar = "derived";
  return p;
}

RhsExpr rep_body_for_nonterminal(const std::string& n) {
  return RhsExpr::sequence({RhsExpr::terminal("[["), RhsExpr::ref(n, Card::Opt, "lhs"),
                            RhsExpr::terminal(":-"), RhsExpr::ref(n, Card::Opt, "rhs"),
                            RhsExpr::terminal("]]")});
}

RhsExpr neg_body(const std::string& n) {
  return RhsExpr::sequence({RhsExpr::terminal("not"), RhsExpr::terminal("[["),
                            RhsExpr::ref(n), RhsExpr::terminal("]]")});
}

}  // namespace

std::vector<Production> derive_interface_layer(const Grammar& g, const GrammarFacts& facts) {
  DeriveCtx ctx(g, facts);
  std::vector<Production> out;
  // 1a: interface nonterminals of L, with their extends relations mirrored
  for (const auto* p : ctx.nonterminals())
    if (p->kind == ProdKind::Interface)
      out.push_back(make_interface(p->name, p->implements_list));
  // 1b: standard nonterminals of L, implements mirrored as extends
  for (const auto* p : ctx.nonterminals())
    if (p->kind == ProdKind::Standard)
      out.push_back(make_interface(p->name, p->implements_list));
  // 1c: optional keywords
  for (const auto& kw : facts.keyword_order)
    out.push_back(make_interface(ctx.kw_names.at(kw), {}));
  return out;
}

std::vector<Production> derive_replacements(const Grammar& g, const GrammarFacts& facts) {
  DeriveCtx ctx(g, facts);
  std::vector<Production> out;
  for (const auto* p : ctx.nonterminals())
    out.push_back(make_production(p->name + "_Rep", p->name,
                                  {rep_body_for_nonterminal(p->name)}));
  for (const auto& kw : facts.keyword_order) {
    const std::string& k = ctx.kw_names.at(kw);
    RhsExpr remove = RhsExpr::sequence({RhsExpr::terminal("[["), RhsExpr::terminal(kw),
                                        RhsExpr::terminal(":-"), RhsExpr::terminal("]]")});
    RhsExpr add = RhsExpr::sequence({RhsExpr::terminal("[["), RhsExpr::terminal(":-"),
                                     RhsExpr::terminal(kw), RhsExpr::terminal("]]")});
    out.push_back(make_production(k + "_Rep", k, {std::move(remove), std::move(add)}));
  }
  return out;
}

std::vector<Production> derive_negations(const Grammar& g, const GrammarFacts& facts) {
  DeriveCtx ctx(g, facts);
  std::vector<Production> out;
  for (const auto* p : ctx.nonterminals())
    out.push_back(make_production(p->name + "_Neg", p->name, {neg_body(p->name)}));
  for (const auto& kw : facts.keyword_order) {
    const std::string& k = ctx.kw_names.at(kw);
    out.push_back(make_production(k + "_Neg", k, {neg_body(k)}));
  }
  return out;
}

std::vector<Production> derive_patterns(const Grammar& g, const GrammarFacts& facts) {
  DeriveCtx ctx(g, facts);
  std::vector<Production> out;
  for (const auto* p : ctx.nonterminals()) {
    std::vector<RhsExpr> alts;
    if (p->kind == ProdKind::Standard) {
      std::vector<RhsExpr> syntax_alts;
      for (const auto& alt : p->body->children)
        syntax_alts.push_back(ctx.transform_syntax(alt));
      alts = syntax_alts;
      alts.push_back(RhsExpr::sequence(
          {RhsExpr::terminal(p->name), RhsExpr::ref("SchemaVar"), RhsExpr::terminal(";")}));
      // white box: name, variable, then the rewritten syntax in brackets
      std::vector<RhsExpr> white = {RhsExpr::terminal(p->name), RhsExpr::ref("SchemaVar"),
                                    RhsExpr::terminal("[[")};
      if (syntax_alts.size() == 1) {
        for (auto& e : syntax_alts.front().children) white.push_back(e);
      } else {
        white.push_back(RhsExpr::group(RhsExpr::alternative(syntax_alts), Card::One));
      }
      white.push_back(RhsExpr::terminal("]]"));
      alts.push_back(RhsExpr::sequence(std::move(white)));
    } else {
      alts.push_back(RhsExpr::sequence(
          {RhsExpr::terminal(p->name), RhsExpr::ref("SchemaVar"), RhsExpr::terminal(";")}));
    }
    out.push_back(make_production(p->name + "_Pattern", p->name, std::move(alts)));
  }
  for (const auto& kw : facts.keyword_order) {
    const std::string& k = ctx.kw_names.at(kw);
    out.push_back(
        make_production(k + "_Pattern", k, {RhsExpr::sequence({RhsExpr::terminal(kw)})}));
  }
  return out;
}

Production derive_tfrule(const Grammar& g, const GrammarFacts& facts) {
  DeriveCtx ctx(g, facts);
  std::vector<RhsExpr> alts;
  for (const auto* p : ctx.nonterminals()) {
    if (facts.is_nullable(p->name)) continue;
    alts.push_back(RhsExpr::sequence({RhsExpr::ref(p->name)}));
  }
  if (alts.empty()) throw DeriveError("empty TFRule alternative");
  RhsExpr body = RhsExpr::sequence(
      {RhsExpr::group(RhsExpr::alternative(std::move(alts)), Card::Star),
       RhsExpr::ref("Where", Card::Opt)});
  Production p;
  p.name = "TFRule";
  p.kind = ProdKind::Standard;
  p.body = RhsExpr::alternative({std::move(body)});
  p.origin_grammar = "derived";
  return p;
}

DerivedGrammar derive_dstl(const Grammar& g, const std::map<std::string, Grammar>& registry) {
  DerivedGrammar d;
  d.source_language = flatten_inheritance(g, registry);
  d.source_facts = analyze(d.source_language);
  const Grammar& l = d.source_language;
  const GrammarFacts& facts = d.source_facts;
  DeriveCtx ctx(l, facts);

  Grammar& tl = d.grammar;
  tl.name = l.name + "Trans";
  auto add = [&](Production p, const std::string& rule, const std::string& source) {
    d.provenance[p.name] = {rule, source};
    tl.productions.push_back(std::move(p));
  };

  // Lexical builtins first so round-tripping through `extends Common`
  // reproduces the same production order.
  for (const auto& p : builtin_common().productions) add(p, "tfcommons", "");

  add(derive_tfrule(l, facts), "5", "");

  for (auto& p : derive_interface_layer(l, facts)) {
    std::string rule;
    std::string source = p.name;
    if (l.find(p.name)) {
      rule = l.find(p.name)->kind == ProdKind::Interface ? "1a" : "1b";
    } else {
      rule = "1c";
      for (const auto& [kw, name] : ctx.kw_names)
        if (name == p.name) source = kw;
    }
    add(std::move(p), rule, source);
  }

  // Per-symbol blocks: Rep, Neg, Pattern, nonterminals first then keywords.
  auto reps = derive_replacements(l, facts);
  auto negs = derive_negations(l, facts);
  auto pats = derive_patterns(l, facts);
  size_t nt_count = ctx.nonterminals().size();
  for (size_t i = 0; i < reps.size(); ++i) {
    bool is_kw = i >= nt_count;
    std::string source;
    if (is_kw) {
      source = facts.keyword_order[i - nt_count];
    } else {
      source = ctx.nonterminals()[i]->name;
    }
    bool iface = !is_kw && ctx.nonterminals()[i]->kind == ProdKind::Interface;
    add(std::move(reps[i]), is_kw ? "2b" : "2a", source);
    add(std::move(negs[i]), is_kw ? "3b" : "3a", source);
    add(std::move(pats[i]), is_kw ? "4c" : (iface ? "4b" : "4a"), source);
  }

  // Embedded common base; derived productions win on name collision.
  Grammar tfc = flatten_inheritance(tfcommons_grammar(), {});
  for (const auto& p : tfc.productions) {
    if (tl.find(p.name)) continue;
    add(p, "tfcommons", "");
  }

  auto problems = validate(tl);
  if (!problems.empty()) throw DeriveError("derived grammar invalid: " + problems.front());
  return d;
}

std::string provenance_sidecar(const DerivedGrammar& d) {
  std::string out;
  for (const auto& p : d.grammar.productions) {
    const auto& prov = d.provenance.at(p.name);
    out += p.name + "\t" + prov.rule + "\t" + prov.source + "\n";
  }
  return out;
}

std::map<std::string, DerivedGrammar::Provenance> parse_provenance(std::string_view text) {
  std::map<std::string, DerivedGrammar::Provenance> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw Error("malformed provenance line: " + line);
    out[line.substr(0, t1)] = {line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)};
  }
  return out;
}

}  // namespace dstl
