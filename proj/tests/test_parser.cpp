// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include <functional>
#include <map>
#include <tuple>

#include "doctest.h"
#include "dstl/grammar.hpp"
#include "dstl/lexer.hpp"
#include "dstl/parser.hpp"
#include "test_support.hpp"

using namespace dstl;

namespace {

Grammar load_cd() {
  return flatten_inheritance(parse_grammar(read_file(corpus_path("cd.mc-grammar"))), {});
}

// Independent recognition oracle: top-down derivability over the raw RhsExpr
// tree with memoization. Shares nothing with the chart parser.
struct DerivesOracle {
  const Grammar& g;
  const std::vector<Token>& toks;
  std::map<std::tuple<const void*, int, int>, int> memo;  // -1 in progress

  bool tok_is(int i, const std::string& text) const {
    return (toks[i].kind == Token::Kind::Keyword || toks[i].kind == Token::Kind::Symbol) &&
           toks[i].text == text;
  }

  bool seq_derives(const std::vector<RhsExpr>& elems, size_t k, int i, int j) {
    if (k == elems.size()) return i == j;
    for (int m = i; m <= j; ++m)
      if (expr_derives(elems[k], i, m) && seq_derives(elems, k + 1, m, j)) return true;
    return false;
  }

  bool nt_derives(const std::string& name, int i, int j) {
    if (name == "Name") return j == i + 1 && toks[i].kind == Token::Kind::Name;
    if (name == "SchemaVar") return j == i + 1 && toks[i].kind == Token::Kind::SchemaVar;
    if (name == "String") return j == i + 1 && toks[i].kind == Token::Kind::String;
    const Production* p = g.find(name);
    REQUIRE(p != nullptr);
    auto key = std::make_tuple(static_cast<const void*>(p), i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second == 1;
    memo[key] = -1;
    bool ok = false;
    if (p->kind == ProdKind::Interface) {
      for (const auto& q : g.productions) {
        for (const auto& iface : q.implements_list)
          if (iface == name && nt_derives(q.name, i, j)) ok = true;
        if (ok) break;
      }
    } else if (p->body) {
      for (const auto& alt : p->body->children)
        if (seq_derives(alt.children, 0, i, j)) {
          ok = true;
          break;
        }
    }
    memo[key] = ok ? 1 : 0;
    return ok;
  }

  bool expr_derives(const RhsExpr& e, int i, int j) {
    switch (e.kind) {
      case RhsExpr::Kind::Terminal:
        return j == i + 1 && tok_is(i, e.text);
      case RhsExpr::Kind::OptionalKeyword:
        return i == j || (j == i + 1 && tok_is(i, e.text));
      case RhsExpr::Kind::NontermRef:
        return card_derives(e.card, [&](int a, int b) { return nt_derives(e.target, a, b); },
                            i, j);
      case RhsExpr::Kind::Group:
        return card_derives(
            e.card,
            [&](int a, int b) {
              for (const auto& alt : e.children.front().children)
                if (seq_derives(alt.children, 0, a, b)) return true;
              return false;
            },
            i, j);
      default:
        return false;
    }
  }

  bool card_derives(Card c, const std::function<bool(int, int)>& one, int i, int j) {
    switch (c) {
      case Card::One:
        return one(i, j);
      case Card::Opt:
        return i == j || one(i, j);
      case Card::Star: {
        if (i == j) return true;
        for (int m = i + 1; m <= j; ++m)
          if (one(i, m) && card_derives(Card::Star, one, m, j)) return true;
        return false;
      }
      case Card::Plus: {
        for (int m = i + 1; m <= j; ++m)
          if (one(i, m) && card_derives(Card::Star, one, m, j)) return true;
        return false;
      }
    }
    return false;
  }
};

bool oracle_recognizes(const Grammar& g, const LexSpec& spec, const std::string& start,
                       const std::string& text) {
  std::vector<Token> toks;
  try {
    toks = lex(spec, text);
  } catch (const LexError&) {
    return false;
  }
  DerivesOracle o{g, toks, {}};
  return o.nt_derives(start, 0, static_cast<int>(toks.size()));
}

}  // namespace

TEST_CASE("build_lexer collects keywords and orders symbols by length") {
  Grammar cd = load_cd();
  LexSpec spec = build_lexer(cd);
  for (const char* kw : {"classdiagram", "class", "abstract", "extends"})
    CHECK(spec.keywords.count(kw) == 1);
  CHECK(spec.keywords.count("String") == 0);

  Grammar tl = flatten_inheritance(
      parse_grammar("grammar T { R = \"[[\" \"[\" \":-\" \":\" \"]]\" Name; }"), {});
  LexSpec tspec = build_lexer(tl);
  auto toks = lex(tspec, "[[ [ :- : ]]");
  REQUIRE(toks.size() == 5);
  CHECK(toks[0].text == "[[");
  CHECK(toks[1].text == "[");
  CHECK(toks[2].text == ":-");
  CHECK(toks[3].text == ":");
  CHECK(toks[4].text == "]]");
}

TEST_CASE("lex classifies schema variables, names and strings") {
  Grammar cd = load_cd();
  LexSpec spec = build_lexer(cd);
  auto toks = lex(spec, "class $_ $A1 Profile \"ab\\\"c\" // comment\n;");
  REQUIRE(toks.size() == 6);
  CHECK(toks[0].kind == Token::Kind::Keyword);
  CHECK(toks[1].kind == Token::Kind::SchemaVar);
  CHECK(toks[1].text == "$_");
  CHECK(toks[2].kind == Token::Kind::SchemaVar);
  CHECK(toks[2].text == "$A1");
  CHECK(toks[3].kind == Token::Kind::Name);
  CHECK(toks[4].kind == Token::Kind::String);
  CHECK(toks[4].text == "ab\"c");
  CHECK(toks[5].kind == Token::Kind::Symbol);
  CHECK_THROWS_AS(lex(spec, "class @"), LexError);
}

TEST_CASE("parse builds the running example model") {
  Grammar cd = load_cd();
  GrammarFacts f = analyze(cd);
  Parser parser(cd, f);
  SyntaxTree t = parser.parse(read_file(corpus_path("models/profile_v0.cd")), "Definition");

  const Node& root = t.root();
  CHECK(root.type == "Definition");
  CHECK(root.alt == 0);
  auto classes = root.nodes_in_slot("CDElement");
  REQUIRE(classes.size() == 3);
  CHECK(classes[0]->type == "Class");
  CHECK(classes[0]->keyword_flags.at("abstract"));
  CHECK_FALSE(classes[1]->keyword_flags.at("abstract"));

  // Person extends Profile, with two attributes
  const Node* person = classes[1];
  CHECK(person->token_in_slot("Name#0")->text == "Person");
  CHECK(person->token_in_slot("superclass")->text == "Profile");
  auto members = person->nodes_in_slot("CDMember");
  REQUIRE(members.size() == 2);
  CHECK(members[0]->type == "Attribute");
  CHECK(members[0]->token_in_slot("type")->text == "String");
  CHECK(members[0]->token_in_slot("Name#0")->text == "name");
  CHECK(members[0]->keyword_flags.at("public"));
  CHECK_FALSE(members[0]->keyword_flags.at("private"));
}

TEST_CASE("parse reports furthest progress on failure") {
  Grammar cd = load_cd();
  GrammarFacts f = analyze(cd);
  Parser parser(cd, f);
  CHECK_THROWS_WITH_AS(parser.parse("classdiagram X { class }", "Definition"),
                       doctest::Contains("unexpected '}'"), ParseError);
  CHECK_THROWS_WITH_AS(parser.parse("classdiagram X {", "Definition"),
                       doctest::Contains("unexpected end of input"), ParseError);
  CHECK_FALSE(parser.recognizes("", "Definition"));
}

TEST_CASE("empty input parses for a nullable start") {
  Grammar g = flatten_inheritance(parse_grammar("grammar N { A = B*; B = \"b\"; }"), {});
  GrammarFacts f = analyze(g);
  Parser parser(g, f);
  SyntaxTree t = parser.parse("", "A");
  CHECK(t.root().type == "A");
  CHECK(t.root().children.empty());
}

TEST_CASE("ambiguity policy prefers the earliest alternative and greedy lists") {
  Grammar g = flatten_inheritance(
      parse_grammar("grammar P { A = \"a\" | \"a\"; L = B* (\"b\")*; B = \"b\"; }"), {});
  GrammarFacts f = analyze(g);
  Parser parser(g, f);
  CHECK(parser.parse("a", "A").root().alt == 0);
  // greedy: B* consumes everything, trailing "b"* stays empty
  SyntaxTree t = parser.parse("b b b", "L");
  CHECK(t.root().nodes_in_slot("B").size() == 3);
}

TEST_CASE("optional name before mandatory name resolves by feasibility") {
  Grammar g = flatten_inheritance(
      parse_grammar("grammar O { A = \"x\" Name? left:Name \"->\" right:Name \";\"; }"), {});
  GrammarFacts f = analyze(g);
  Parser parser(g, f);
  SyntaxTree two = parser.parse("x opt a -> b ;", "A");
  CHECK(two.root().token_in_slot("Name#0")->text == "opt");
  CHECK(two.root().token_in_slot("left")->text == "a");
  SyntaxTree one = parser.parse("x a -> b ;", "A");
  CHECK(one.root().token_in_slot("Name#0") == nullptr);
  CHECK(one.root().token_in_slot("left")->text == "a");
}

TEST_CASE("unparse is canonical and round-trips the fixtures") {
  Grammar cd = load_cd();
  GrammarFacts f = analyze(cd);
  Parser parser(cd, f);
  for (const char* rel : {"models/profile_v0.cd", "models/profile_pulled_up.cd",
                          "models/profile_encapsulated_group_excerpt.cd"}) {
    std::string text = read_file(corpus_path(rel));
    SyntaxTree t = parser.parse(text, "Definition");
    std::string printed = unparse(t);
    CHECK(token_equivalent(parser.lex_spec(), text, printed));
    SyntaxTree t2 = parser.parse(printed, "Definition");
    CHECK(deep_equal(t.root(), t2.root()));
  }
}

TEST_CASE("chart recognition agrees with a derivability oracle on short strings") {
  // Nullable, recursive, with an interface alternative.
  Grammar g = flatten_inheritance(parse_grammar("grammar Toy {"
                                                "  S = \"a\" S \"b\" | T;"
                                                "  T = \"c\"?;"
                                                "  interface I;"
                                                "  U implements I = \"a\" I \"a\" | \"b\";"
                                                "}"),
                                  {});
  GrammarFacts f = analyze(g);
  Parser parser(g, f);
  LexSpec spec = build_lexer(g);

  const char letters[] = {'a', 'b', 'c'};
  std::function<void(std::string&, int)> enumerate = [&](std::string& acc, int remaining) {
    for (const char* start : {"S", "I"}) {
      bool chart = parser.recognizes(acc, start);
      bool oracle = oracle_recognizes(g, spec, start, acc);
      CAPTURE(acc);
      CAPTURE(start);
      CHECK(chart == oracle);
    }
    if (remaining == 0) return;
    for (char c : letters) {
      acc.push_back(c);
      acc.push_back(' ');
      enumerate(acc, remaining - 1);
      acc.pop_back();
      acc.pop_back();
    }
  };
  std::string acc;
  enumerate(acc, 8);
}

namespace {

void check_nullable_against_empty_parse(const Grammar& g) {
  GrammarFacts f = analyze(g);
  Parser parser(g, f);
  for (const auto& p : g.productions) {
    if (p.kind == ProdKind::LexicalBuiltin) continue;
    CAPTURE(p.name);
    CHECK(parser.recognizes("", p.name) == f.is_nullable(p.name));
  }
}

}  // namespace

TEST_CASE("nullable facts agree with parsing the empty string") {
  check_nullable_against_empty_parse(load_cd());
  check_nullable_against_empty_parse(flatten_inheritance(
      parse_grammar("grammar N { A = \"a\"?; B = \"b\"; C = A B; D = A A; interface I; "
                    "E implements I = \"e\"?; }"),
      {}));
}
