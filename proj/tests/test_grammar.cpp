// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "doctest.h"
#include "dstl/grammar.hpp"
#include "test_support.hpp"

using namespace dstl;

TEST_CASE("parse_grammar handles the class diagram grammar") {
  Grammar g = parse_grammar(read_file(corpus_path("cd.mc-grammar")));
  CHECK(g.name == "CD");
  REQUIRE(g.extends_names.size() == 1);
  CHECK(g.extends_names[0] == "Common");

  std::vector<std::string> names;
  for (const auto& p : g.productions) names.push_back(p.name);
  std::vector<std::string> expected = {"Definition", "CDElement", "Class",
                                       "CDMember",   "Attribute", "Method",
                                       "Parameter",  "Association", "Interface"};
  CHECK(names == expected);

  const Production* cde = g.find("CDElement");
  REQUIRE(cde != nullptr);
  CHECK(cde->kind == ProdKind::Interface);
  CHECK_FALSE(cde->body.has_value());

  const Production* cls = g.find("Class");
  REQUIRE(cls != nullptr);
  CHECK(cls->implements_list == std::vector<std::string>{"CDElement"});
  // ["abstract"]? is an optional keyword, not a terminal
  const RhsExpr& seq = cls->body->children.front();
  CHECK(seq.children.front().kind == RhsExpr::Kind::OptionalKeyword);
  CHECK(seq.children.front().text == "abstract");
}

TEST_CASE("parse_grammar minimal grammar") {
  Grammar g = parse_grammar("grammar G { A = \"a\"; }");
  REQUIRE(g.productions.size() == 1);
  const Production& a = g.productions[0];
  CHECK(a.kind == ProdKind::Standard);
  REQUIRE(a.body->children.size() == 1);
  REQUIRE(a.body->children[0].children.size() == 1);
  const RhsExpr& t = a.body->children[0].children[0];
  CHECK(t.kind == RhsExpr::Kind::Terminal);
  CHECK(t.text == "a");
}

TEST_CASE("parse_grammar TfIdentifier shape") {
  Grammar g = parse_grammar(
      "grammar T {\n"
      "  TfIdentifier = Ident | \"[[\" Ident \":-\" rhs:Ident \"]]\";\n"
      "  Ident = Name | SchemaVar;\n"
      "}");
  const Production* tfi = g.find("TfIdentifier");
  REQUIRE(tfi != nullptr);
  CHECK(tfi->body->children.size() == 2);
  const RhsExpr& repl = tfi->body->children[1];
  REQUIRE(repl.children.size() == 5);
  CHECK(repl.children[0].text == "[[");
  CHECK(repl.children[4].text == "]]");
  CHECK(repl.children[3].label == "rhs");
}

TEST_CASE("parse_grammar errors carry positions") {
  CHECK_THROWS_WITH_AS(parse_grammar("grammar G { A = ; }"), doctest::Contains("1:17"),
                       GrammarError);
  CHECK_THROWS_WITH_AS(parse_grammar("grammar G { A = \"a\"; A = \"b\"; }"),
                       doctest::Contains("duplicate production name 'A'"), GrammarError);
  CHECK_THROWS_AS(parse_grammar("grammar G { A = lbl:B lbl:C; }"), GrammarError);
  CHECK_THROWS_AS(parse_grammar("grammar G { A = \"a\"* ; }"), GrammarError);
}

TEST_CASE("grammar unparse round-trips") {
  for (const char* rel : {"cd.mc-grammar"}) {
    Grammar g = parse_grammar(read_file(corpus_path(rel)));
    Grammar g2 = parse_grammar(unparse_grammar(g));
    CHECK(structurally_equal(g, g2));
  }
  Grammar toy = parse_grammar(
      "grammar Toy { A = (\"x\" | B)* lbl:B? \"kw\"? [\"opt\"]? Name+; interface B; "
      "C implements B = \"c\"; }");
  CHECK(structurally_equal(toy, parse_grammar(unparse_grammar(toy))));
}

TEST_CASE("flatten_inheritance resolves Common and is idempotent") {
  Grammar cd = parse_grammar(read_file(corpus_path("cd.mc-grammar")));
  Grammar flat = flatten_inheritance(cd, {});
  CHECK(flat.extends_names.empty());
  const Production* name = flat.find("Name");
  REQUIRE(name != nullptr);
  CHECK(name->kind == ProdKind::LexicalBuiltin);
  // supergrammar productions first
  CHECK(flat.productions.front().name == "Name");
  CHECK(validate(flat).empty());

  Grammar again = flatten_inheritance(flat, {});
  CHECK(structurally_equal(flat, again));
}

TEST_CASE("flatten_inheritance identity without extends") {
  Grammar g = parse_grammar("grammar G { A = \"a\"; }");
  Grammar flat = flatten_inheritance(g, {});
  CHECK(structurally_equal(g, flat));
}

TEST_CASE("flatten_inheritance diamond matches name-set union oracle") {
  std::map<std::string, Grammar> reg;
  reg["D"] = parse_grammar("grammar D { Base = \"base\"; }");
  reg["B"] = parse_grammar("grammar B extends D { Left = \"l\"; }");
  reg["C"] = parse_grammar("grammar C extends D { Right = \"r\"; }");
  Grammar a = parse_grammar("grammar A extends B, C { Top = Base Left Right; }");
  Grammar flat = flatten_inheritance(a, reg);

  std::set<std::string> got;
  for (const auto& p : flat.productions) CHECK(got.insert(p.name).second);
  std::set<std::string> expected;
  for (const auto* g : {&reg["D"], &reg["B"], &reg["C"], &a})
    for (const auto& p : g->productions) expected.insert(p.name);
  CHECK(got == expected);
}

TEST_CASE("flatten_inheritance override and errors") {
  std::map<std::string, Grammar> reg;
  reg["S"] = parse_grammar("grammar S { A = \"super\"; B = \"b\"; }");
  Grammar g = parse_grammar("grammar G extends S { A = \"sub\"; }");
  Grammar flat = flatten_inheritance(g, reg);
  REQUIRE(flat.productions.size() == 2);
  CHECK(flat.productions[0].name == "A");
  CHECK(flat.productions[0].body->children[0].children[0].text == "sub");

  CHECK_THROWS_AS(flatten_inheritance(parse_grammar("grammar G extends Missing { A = \"a\"; }"), {}),
                  GrammarError);
  std::map<std::string, Grammar> cyc;
  cyc["X"] = parse_grammar("grammar X extends Y { A = \"a\"; }");
  cyc["Y"] = parse_grammar("grammar Y extends X { B = \"b\"; }");
  CHECK_THROWS_AS(flatten_inheritance(cyc["X"], cyc), GrammarError);
}

TEST_CASE("analyze computes keywords, implementors and nullability on CD") {
  Grammar flat = flatten_inheritance(parse_grammar(read_file(corpus_path("cd.mc-grammar"))), {});
  GrammarFacts f = analyze(flat);

  CHECK(f.nullable.empty());
  for (const char* kw : {"abstract", "public", "private", "protected"})
    CHECK(f.optional_keywords.count(kw) == 1);
  CHECK(f.keyword_order == std::vector<std::string>{"abstract", "public", "private", "protected"});
  CHECK(f.optional_keywords.at("abstract") == std::set<std::string>{"Class"});

  auto& impls = f.implementors.at("CDElement");
  CHECK(std::find(impls.begin(), impls.end(), "Class") != impls.end());
  CHECK(f.concrete_types("CDElement") ==
        std::set<std::string>{"Class", "Association", "Interface"});
  CHECK(f.concrete_types("Class") == std::set<std::string>{"Class"});
}

TEST_CASE("analyze nullability") {
  Grammar g = flatten_inheritance(
      parse_grammar("grammar N { A = \"a\"?; B = \"b\"; C = A B; D = A A; "
                    "interface I; E implements I = \"e\"?; }"),
      {});
  GrammarFacts f = analyze(g);
  CHECK(f.is_nullable("A"));
  CHECK(f.is_nullable("D"));
  CHECK(f.is_nullable("E"));
  CHECK(f.is_nullable("I"));  // interface nullable iff an implementor is
  CHECK_FALSE(f.is_nullable("B"));
  CHECK_FALSE(f.is_nullable("C"));
}

TEST_CASE("validate flags unresolved references") {
  Grammar g = parse_grammar("grammar G { A = B; }");
  Grammar flat = flatten_inheritance(g, {});
  auto problems = validate(flat);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("unknown nonterminal 'B'") != std::string::npos);
  CHECK_THROWS_AS(analyze(flat), GrammarError);
}
