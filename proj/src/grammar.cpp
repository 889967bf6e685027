// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace dstl {

LineCol line_col_at(std::string_view text, int offset) {
  LineCol lc;
  int n = std::min<int>(offset, static_cast<int>(text.size()));
  for (int i = 0; i < n; ++i) {
    if (text[i] == '\n') {
      ++lc.line;
      lc.col = 1;
    } else {
      ++lc.col;
    }
  }
  return lc;
}

std::string at(std::string_view text, int offset, const std::string& msg) {
  LineCol lc = line_col_at(text, offset);
  return std::to_string(lc.line) + ":" + std::to_string(lc.col) + ": " + msg;
}

RhsExpr RhsExpr::sequence(std::vector<RhsExpr> elems) {
  RhsExpr e;
  e.kind = Kind::Sequence;
  e.children = std::move(elems);
  return e;
}

RhsExpr RhsExpr::alternative(std::vector<RhsExpr> seqs) {
  RhsExpr e;
  e.kind = Kind::Alternative;
  e.children = std::move(seqs);
  return e;
}

RhsExpr RhsExpr::terminal(std::string text) {
  RhsExpr e;
  e.kind = Kind::Terminal;
  e.text = std::move(text);
  return e;
}

RhsExpr RhsExpr::optional_keyword(std::string text, bool bracketed) {
  RhsExpr e;
  e.kind = Kind::OptionalKeyword;
  e.text = std::move(text);
  e.bracketed = bracketed;
  return e;
}

RhsExpr RhsExpr::ref(std::string target, Card card, std::string label) {
  RhsExpr e;
  e.kind = Kind::NontermRef;
  e.target = std::move(target);
  e.label = std::move(label);
  e.card = card;
  return e;
}

RhsExpr RhsExpr::group(RhsExpr alt, Card card) {
  RhsExpr e;
  e.kind = Kind::Group;
  e.children.push_back(std::move(alt));
  e.card = card;
  return e;
}

bool structurally_equal(const RhsExpr& a, const RhsExpr& b) {
  if (a.kind != b.kind || a.text != b.text || a.target != b.target ||
      a.label != b.label || a.card != b.card)
    return false;
  if (a.kind == RhsExpr::Kind::OptionalKeyword && a.bracketed != b.bracketed) return false;
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

bool structurally_equal(const Production& a, const Production& b) {
  if (a.name != b.name || a.kind != b.kind || a.implements_list != b.implements_list)
    return false;
  if (a.body.has_value() != b.body.has_value()) return false;
  if (a.body && !structurally_equal(*a.body, *b.body)) return false;
  return true;
}

bool structurally_equal(const Grammar& a, const Grammar& b) {
  if (a.name != b.name || a.extends_names != b.extends_names) return false;
  if (a.productions.size() != b.productions.size()) return false;
  for (size_t i = 0; i < a.productions.size(); ++i)
    if (!structurally_equal(a.productions[i], b.productions[i])) return false;
  return true;
}

const Production* Grammar::find(std::string_view prod_name) const {
  for (const auto& p : productions)
    if (p.name == prod_name) return &p;
  return nullptr;
}

bool is_builtin_lexical_name(std::string_view name) {
  return name == "Name" || name == "SchemaVar" || name == "String";
}

Grammar builtin_common() {
  Grammar g;
  g.name = "Common";
  Production name_prod;
  name_prod.name = "Name";
  name_prod.kind = ProdKind::LexicalBuiltin;
  name_prod.origin_grammar = "Common";
  g.productions.push_back(std::move(name_prod));
  return g;
}

// ---------------------------------------------------------------------------
// Grammar source lexing and parsing
// ---------------------------------------------------------------------------

namespace {

struct GTok {
  enum class Kind { Ident, Str, Punct, End };
  Kind kind;
  std::string text;
  int offset;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<GTok> lex_grammar(std::string_view text) {
  std::vector<GTok> out;
  size_t i = 0;
  const std::string punct = "{}=;|?*+()[]:,";
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int off = static_cast<int>(i);
    if (ident_start(c)) {
      size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({GTok::Kind::Ident, std::string(text.substr(i, j - i)), off});
      i = j;
      continue;
    }
    if (c == '"') {
      std::string value;
      size_t j = i + 1;
      for (;;) {
        if (j >= text.size())
          throw GrammarError(at(text, off, "unterminated string literal"), {off, off + 1});
        char d = text[j];
        if (d == '"') break;
        if (d == '\\') {
          if (j + 1 >= text.size())
            throw GrammarError(at(text, off, "unterminated escape"), {off, off + 1});
          char e = text[j + 1];
          if (e != '"' && e != '\\')
            throw GrammarError(at(text, static_cast<int>(j), "unknown escape sequence"),
                               {static_cast<int>(j), static_cast<int>(j) + 2});
          value.push_back(e);
          j += 2;
          continue;
        }
        if (d == '\n')
          throw GrammarError(at(text, static_cast<int>(j), "newline in string literal"),
                             {static_cast<int>(j), static_cast<int>(j) + 1});
        value.push_back(d);
        ++j;
      }
      out.push_back({GTok::Kind::Str, value, off});
      i = j + 1;
      continue;
    }
    if (punct.find(c) != std::string::npos) {
      out.push_back({GTok::Kind::Punct, std::string(1, c), off});
      ++i;
      continue;
    }
    throw GrammarError(at(text, off, std::string("unexpected character '") + c + "'"),
                       {off, off + 1});
  }
  out.push_back({GTok::Kind::End, "", static_cast<int>(text.size())});
  return out;
}

class GrammarParser {
public:
  explicit GrammarParser(std::string_view text) : text_(text), toks_(lex_grammar(text)) {}

  Grammar parse() {
    Grammar g;
    expect_ident("grammar");
    g.name = expect_name();
    if (peek_ident("extends")) {
      next();
      g.extends_names.push_back(expect_name());
      while (accept_punct(",")) g.extends_names.push_back(expect_name());
    }
    expect_punct("{");
    std::set<std::string> seen;
    while (!accept_punct("}")) {
      Production p = parse_production(g.name);
      if (!seen.insert(p.name).second)
        fail("duplicate production name '" + p.name + "'");
      g.productions.push_back(std::move(p));
    }
    if (cur().kind != GTok::Kind::End) fail("trailing input after grammar");
    return g;
  }

private:
  std::string_view text_;
  std::vector<GTok> toks_;
  size_t pos_ = 0;

  const GTok& cur() const { return toks_[pos_]; }
  void next() { ++pos_; }

  [[noreturn]] void fail(const std::string& msg) {
    int off = cur().offset;
    throw GrammarError(at(text_, off, msg), {off, off + 1});
  }

  bool peek_ident(std::string_view s) const {
    return cur().kind == GTok::Kind::Ident && cur().text == s;
  }
  bool peek_punct(std::string_view s) const {
    return cur().kind == GTok::Kind::Punct && cur().text == s;
  }
  bool accept_punct(std::string_view s) {
    if (!peek_punct(s)) return false;
    next();
    return true;
  }
  void expect_punct(std::string_view s) {
    if (!accept_punct(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect_ident(std::string_view s) {
    if (!peek_ident(s)) fail("expected '" + std::string(s) + "'");
    next();
  }
  std::string expect_name() {
    if (cur().kind != GTok::Kind::Ident) fail("expected identifier");
    std::string s = cur().text;
    next();
    return s;
  }

  Production parse_production(const std::string& grammar_name) {
    Production p;
    p.origin_grammar = grammar_name;
    p.span = {cur().offset, cur().offset};
    if (peek_ident("interface")) {
      next();
      p.kind = ProdKind::Interface;
      p.name = expect_name();
      if (peek_ident("extends")) {
        next();
        p.implements_list.push_back(expect_name());
        while (accept_punct(",")) p.implements_list.push_back(expect_name());
      }
      expect_punct(";");
      return p;
    }
    p.kind = ProdKind::Standard;
    p.name = expect_name();
    if (peek_ident("implements")) {
      next();
      p.implements_list.push_back(expect_name());
      while (accept_punct(",")) p.implements_list.push_back(expect_name());
    }
    expect_punct("=");
    p.body = parse_alternation();
    expect_punct(";");
    p.span.end = cur().offset;
    return p;
  }

  RhsExpr parse_alternation() {
    std::vector<RhsExpr> seqs;
    seqs.push_back(parse_sequence());
    while (accept_punct("|")) seqs.push_back(parse_sequence());
    return RhsExpr::alternative(std::move(seqs));
  }

  bool at_sequence_end() const {
    return peek_punct(";") || peek_punct(")") || peek_punct("|") ||
           cur().kind == GTok::Kind::End;
  }

  RhsExpr parse_sequence() {
    std::vector<RhsExpr> elems;
    std::set<std::string> labels;
    while (!at_sequence_end()) {
      RhsExpr e = parse_element();
      if (e.kind == RhsExpr::Kind::NontermRef && !e.label.empty()) {
        if (!labels.insert(e.label).second)
          fail("duplicate label '" + e.label + "' in sequence");
      }
      elems.push_back(std::move(e));
    }
    if (elems.empty()) fail("empty alternative");
    return RhsExpr::sequence(std::move(elems));
  }

  Card parse_card() {
    if (accept_punct("?")) return Card::Opt;
    if (accept_punct("*")) return Card::Star;
    if (accept_punct("+")) return Card::Plus;
    return Card::One;
  }

  RhsExpr parse_element() {
    int off = cur().offset;
    RhsExpr e;
    if (cur().kind == GTok::Kind::Str) {
      std::string lit = cur().text;
      next();
      if (accept_punct("?")) {
        e = RhsExpr::optional_keyword(lit, /*bracketed=*/false);
      } else {
        if (peek_punct("*") || peek_punct("+"))
          fail("repetition on a terminal is not supported");
        e = RhsExpr::terminal(lit);
      }
    } else if (accept_punct("[")) {
      if (cur().kind != GTok::Kind::Str) fail("expected string literal after '['");
      std::string lit = cur().text;
      next();
      expect_punct("]");
      expect_punct("?");
      e = RhsExpr::optional_keyword(lit, /*bracketed=*/true);
    } else if (accept_punct("(")) {
      RhsExpr alt = parse_alternation();
      expect_punct(")");
      e = RhsExpr::group(std::move(alt), parse_card());
    } else if (cur().kind == GTok::Kind::Ident) {
      std::string first = cur().text;
      next();
      std::string label;
      std::string target = first;
      if (accept_punct(":")) {
        label = first;
        target = expect_name();
      }
      e = RhsExpr::ref(target, parse_card(), label);
    } else {
      fail("expected rule element");
    }
    e.span = {off, cur().offset};
    return e;
  }
};

std::string escape_terminal(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string card_suffix(Card c) {
  switch (c) {
    case Card::One: return "";
    case Card::Opt: return "?";
    case Card::Star: return "*";
    case Card::Plus: return "+";
  }
  return "";
}

void render_expr(const RhsExpr& e, std::string& out) {
  switch (e.kind) {
    case RhsExpr::Kind::Sequence: {
      bool first = true;
      for (const auto& c : e.children) {
        if (!first) out += " ";
        first = false;
        render_expr(c, out);
      }
      break;
    }
    case RhsExpr::Kind::Alternative: {
      bool first = true;
      for (const auto& c : e.children) {
        if (!first) out += " | ";
        first = false;
        render_expr(c, out);
      }
      break;
    }
    case RhsExpr::Kind::Terminal:
      out += "\"" + escape_terminal(e.text) + "\"";
      break;
    case RhsExpr::Kind::OptionalKeyword:
      if (e.bracketed)
        out += "[\"" + escape_terminal(e.text) + "\"]?";
      else
        out += "\"" + escape_terminal(e.text) + "\"?";
      break;
    case RhsExpr::Kind::NontermRef:
      if (!e.label.empty()) out += e.label + ":";
      out += e.target + card_suffix(e.card);
      break;
    case RhsExpr::Kind::Group:
      out += "( ";
      render_expr(e.children.front(), out);
      out += " )" + card_suffix(e.card);
      break;
  }
}

}  // namespace

Grammar parse_grammar(std::string_view text) { return GrammarParser(text).parse(); }

std::string unparse_grammar(const Grammar& g) {
  std::string out = "grammar " + g.name;
  bool has_builtin = false;
  for (const auto& p : g.productions)
    if (p.kind == ProdKind::LexicalBuiltin) has_builtin = true;
  std::vector<std::string> ext = g.extends_names;
  if (has_builtin && std::find(ext.begin(), ext.end(), "Common") == ext.end())
    ext.push_back("Common");
  if (!ext.empty()) {
    out += " extends ";
    for (size_t i = 0; i < ext.size(); ++i) {
      if (i) out += ", ";
      out += ext[i];
    }
  }
  out += " {\n";
  for (const auto& p : g.productions) {
    if (p.kind == ProdKind::LexicalBuiltin) continue;
    if (p.kind == ProdKind::Interface) {
      out += "  interface " + p.name;
      if (!p.implements_list.empty()) {
        out += " extends ";
        for (size_t i = 0; i < p.implements_list.size(); ++i) {
          if (i) out += ", ";
          out += p.implements_list[i];
        }
      }
      out += ";\n";
      continue;
    }
    out += "  " + p.name;
    if (!p.implements_list.empty()) {
      out += " implements ";
      for (size_t i = 0; i < p.implements_list.size(); ++i) {
        if (i) out += ", ";
        out += p.implements_list[i];
      }
    }
    out += " = ";
    render_expr(*p.body, out);
    out += ";\n";
  }
  out += "}\n";
  return out;
}

namespace {

void flatten_into(const Grammar& g, const std::map<std::string, Grammar>& registry,
                  std::set<std::string>& visiting, std::vector<Production>& acc,
                  std::map<std::string, size_t>& index) {
  if (!visiting.insert(g.name).second)
    throw GrammarError("inheritance cycle through grammar '" + g.name + "'");
  for (const auto& super : g.extends_names) {
    auto it = registry.find(super);
    if (it != registry.end()) {
      flatten_into(it->second, registry, visiting, acc, index);
    } else if (super == "Common") {
      Grammar common = builtin_common();
      flatten_into(common, registry, visiting, acc, index);
    } else {
      throw GrammarError("unresolved supergrammar '" + super + "' of '" + g.name + "'");
    }
  }
  for (const auto& p : g.productions) {
    auto it = index.find(p.name);
    if (it == index.end()) {
      index[p.name] = acc.size();
      acc.push_back(p);
    } else {
      acc[it->second] = p;  // subgrammar wins, position kept
    }
  }
  visiting.erase(g.name);
}

}  // namespace

Grammar flatten_inheritance(const Grammar& g, const std::map<std::string, Grammar>& registry) {
  Grammar out;
  out.name = g.name;
  std::set<std::string> visiting;
  std::map<std::string, size_t> index;
  flatten_into(g, registry, visiting, out.productions, index);
  return out;
}

namespace {

void walk_refs(const RhsExpr& e, const std::function<void(const RhsExpr&)>& fn) {
  fn(e);
  for (const auto& c : e.children) walk_refs(c, fn);
}

}  // namespace

std::vector<std::string> validate(const Grammar& g) {
  std::vector<std::string> problems;
  std::set<std::string> names;
  for (const auto& p : g.productions) {
    if (!names.insert(p.name).second)
      problems.push_back("duplicate production name '" + p.name + "'");
  }
  for (const auto& p : g.productions) {
    if (p.kind == ProdKind::Standard && !p.body)
      problems.push_back("standard production '" + p.name + "' has no body");
    if (p.kind != ProdKind::Standard && p.body)
      problems.push_back("production '" + p.name + "' must not have a body");
    if (p.kind == ProdKind::LexicalBuiltin && p.name != "Name")
      problems.push_back("unexpected lexical builtin '" + p.name + "'");
    for (const auto& iface : p.implements_list) {
      const Production* t = g.find(iface);
      if (!t)
        problems.push_back("production '" + p.name + "' references unknown interface '" +
                           iface + "'");
      else if (t->kind != ProdKind::Interface)
        problems.push_back("production '" + p.name + "' lists non-interface '" + iface + "'");
    }
    if (!p.body) continue;
    walk_refs(*p.body, [&](const RhsExpr& e) {
      if (e.kind != RhsExpr::Kind::NontermRef) return;
      if (g.find(e.target) || is_builtin_lexical_name(e.target)) return;
      problems.push_back("production '" + p.name + "' references unknown nonterminal '" +
                         e.target + "'");
    });
  }
  return problems;
}

namespace {

bool expr_nullable(const RhsExpr& e, const std::set<std::string>& nullable) {
  switch (e.kind) {
    case RhsExpr::Kind::Sequence:
      for (const auto& c : e.children)
        if (!expr_nullable(c, nullable)) return false;
      return true;
    case RhsExpr::Kind::Alternative:
      for (const auto& c : e.children)
        if (expr_nullable(c, nullable)) return true;
      return false;
    case RhsExpr::Kind::Terminal:
      return false;
    case RhsExpr::Kind::OptionalKeyword:
      return true;
    case RhsExpr::Kind::NontermRef:
      if (e.card == Card::Opt || e.card == Card::Star) return true;
      return nullable.count(e.target) != 0;
    case RhsExpr::Kind::Group:
      if (e.card == Card::Opt || e.card == Card::Star) return true;
      return expr_nullable(e.children.front(), nullable);
  }
  return false;
}

void collect_concrete(const Grammar& g, const GrammarFacts& f, const std::string& name,
                      std::set<std::string>& out, std::set<std::string>& seen) {
  if (!seen.insert(name).second) return;
  const Production* p = g.find(name);
  if (!p) return;
  if (p->kind == ProdKind::Standard) {
    out.insert(name);
    return;
  }
  if (p->kind != ProdKind::Interface) return;
  auto it = f.implementors.find(name);
  if (it == f.implementors.end()) return;
  for (const auto& impl : it->second) collect_concrete(g, f, impl, out, seen);
}

}  // namespace

const std::set<std::string>& GrammarFacts::concrete_types(const std::string& n) const {
  static const std::set<std::string> empty;
  auto it = concrete.find(n);
  return it == concrete.end() ? empty : it->second;
}

GrammarFacts analyze(const Grammar& g) {
  auto problems = validate(g);
  if (!problems.empty()) throw GrammarError("invalid grammar: " + problems.front());

  GrammarFacts f;

  for (const auto& p : g.productions) {
    for (const auto& iface : p.implements_list) f.implementors[iface].push_back(p.name);
    if (!p.body) continue;
    walk_refs(*p.body, [&](const RhsExpr& e) {
      if (e.kind != RhsExpr::Kind::OptionalKeyword) return;
      if (!f.optional_keywords.count(e.text)) f.keyword_order.push_back(e.text);
      f.optional_keywords[e.text].insert(p.name);
      f.keywords_of[p.name].insert(e.text);
    });
  }

  // Slot keys. Unlabeled references to lexical-ish targets are indexed per
  // top-level alternative so a token child can be addressed stably.
  for (const auto& p : g.productions) {
    if (!p.body) continue;
    for (const auto& alt : p.body->children) {
      std::map<std::string, int> counters;
      std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
        if (e.kind == RhsExpr::Kind::NontermRef) {
          if (!e.label.empty()) {
            f.ref_slots[&e] = e.label;
          } else if (is_builtin_lexical_name(e.target) || e.target == "TfIdentifier") {
            f.ref_slots[&e] = e.target + "#" + std::to_string(counters[e.target]++);
          } else {
            f.ref_slots[&e] = e.target;
          }
        }
        for (const auto& c : e.children) walk(c);
      };
      walk(alt);
    }
  }

  // Nullability fixpoint; interface nonterminals are nullable iff any
  // implementor is.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions) {
      if (f.nullable.count(p.name)) continue;
      bool n = false;
      if (p.kind == ProdKind::Standard) {
        n = expr_nullable(*p.body, f.nullable);
      } else if (p.kind == ProdKind::Interface) {
        auto it = f.implementors.find(p.name);
        if (it != f.implementors.end())
          for (const auto& impl : it->second)
            if (f.nullable.count(impl)) n = true;
      }
      if (n) {
        f.nullable.insert(p.name);
        changed = true;
      }
    }
  }

  for (const auto& p : g.productions) {
    std::set<std::string> out, seen;
    collect_concrete(g, f, p.name, out, seen);
    f.concrete[p.name] = std::move(out);
  }

  return f;
}

}  // namespace dstl
