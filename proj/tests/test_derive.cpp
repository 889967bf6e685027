// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "doctest.h"
#include "dstl/derive.hpp"
#include "test_support.hpp"

using namespace dstl;

namespace {

Grammar load_cd_flat() {
  return flatten_inheritance(parse_grammar(read_file(corpus_path("cd.mc-grammar"))), {});
}

Production prod_from(const std::string& text) {
  Grammar g = parse_grammar("grammar X { " + text + " }");
  return g.productions.at(0);
}

const Production* find_in(const std::vector<Production>& ps, const std::string& name) {
  for (const auto& p : ps)
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace

TEST_CASE("interface layer mirrors implements and covers keywords") {
  Grammar cd = load_cd_flat();
  GrammarFacts f = analyze(cd);
  auto layer = derive_interface_layer(cd, f);

  const Production* cls = find_in(layer, "Class");
  REQUIRE(cls != nullptr);
  CHECK(cls->kind == ProdKind::Interface);
  CHECK(cls->implements_list == std::vector<std::string>{"CDElement"});

  const Production* abstract = find_in(layer, "Abstract");
  REQUIRE(abstract != nullptr);
  CHECK(abstract->implements_list.empty());

  // 1a interfaces first, then 1b, then 1c keyword interfaces
  CHECK(layer.front().name == "CDElement");
  CHECK(layer.back().name == "Protected");

  Grammar lone = flatten_inheritance(parse_grammar("grammar L { A = \"a\"; }"), {});
  auto lone_layer = derive_interface_layer(lone, analyze(lone));
  REQUIRE(lone_layer.size() == 1);
  CHECK(lone_layer[0].name == "A");
  CHECK(lone_layer[0].implements_list.empty());
}

TEST_CASE("replacement productions follow the bracket operator shapes") {
  Grammar cd = load_cd_flat();
  GrammarFacts f = analyze(cd);
  auto reps = derive_replacements(cd, f);

  const Production* def = find_in(reps, "Definition_Rep");
  REQUIRE(def != nullptr);
  CHECK(structurally_equal(
      *def, prod_from("Definition_Rep implements Definition = "
                      "\"[[\" lhs:Definition? \":-\" rhs:Definition? \"]]\";")));

  const Production* abs = find_in(reps, "Abstract_Rep");
  REQUIRE(abs != nullptr);
  CHECK(structurally_equal(
      *abs, prod_from("Abstract_Rep implements Abstract = "
                      "\"[[\" \"abstract\" \":-\" \"]]\" | \"[[\" \":-\" \"abstract\" \"]]\";")));

  Grammar plus = flatten_inheritance(parse_grammar("grammar P { X = [\"+\"]? \"x\"; }"), {});
  auto preps = derive_replacements(plus, analyze(plus));
  const Production* prep = find_in(preps, "Plus_Rep");
  REQUIRE(prep != nullptr);
  CHECK(structurally_equal(
      *prep, prod_from("Plus_Rep implements Plus = "
                       "\"[[\" \"+\" \":-\" \"]]\" | \"[[\" \":-\" \"+\" \"]]\";")));
}

TEST_CASE("negation productions") {
  Grammar cd = load_cd_flat();
  auto negs = derive_negations(cd, analyze(cd));
  CHECK(structurally_equal(*find_in(negs, "Definition_Neg"),
                           prod_from("Definition_Neg implements Definition = "
                                     "\"not\" \"[[\" Definition \"]]\";")));
  CHECK(structurally_equal(*find_in(negs, "Abstract_Neg"),
                           prod_from("Abstract_Neg implements Abstract = "
                                     "\"not\" \"[[\" Abstract \"]]\";")));

  Grammar lone = flatten_inheritance(parse_grammar("grammar L { A = \"a\"; }"), {});
  auto lnegs = derive_negations(lone, analyze(lone));
  CHECK(structurally_equal(*find_in(lnegs, "A_Neg"),
                           prod_from("A_Neg implements A = \"not\" \"[[\" A \"]]\";")));
}

TEST_CASE("pattern productions rewrite keywords and names") {
  Grammar cd = load_cd_flat();
  auto pats = derive_patterns(cd, analyze(cd));

  CHECK(structurally_equal(
      *find_in(pats, "Definition_Pattern"),
      prod_from("Definition_Pattern implements Definition = "
                "\"classdiagram\" TfIdentifier \"{\" CDElement* \"}\""
                " | \"Definition\" SchemaVar \";\""
                " | \"Definition\" SchemaVar \"[[\" \"classdiagram\" TfIdentifier \"{\" "
                "CDElement* \"}\" \"]]\";")));

  CHECK(structurally_equal(*find_in(pats, "Abstract_Pattern"),
                           prod_from("Abstract_Pattern implements Abstract = \"abstract\";")));

  CHECK(structurally_equal(
      *find_in(pats, "CDElement_Pattern"),
      prod_from("CDElement_Pattern implements CDElement = \"CDElement\" SchemaVar \";\";")));

  // optional keywords become optional interface references
  CHECK(structurally_equal(
      *find_in(pats, "Attribute_Pattern"),
      prod_from("Attribute_Pattern implements Attribute = "
                "Public? Private? Protected? type:TfIdentifier TfIdentifier \";\""
                " | \"Attribute\" SchemaVar \";\""
                " | \"Attribute\" SchemaVar \"[[\" Public? Private? Protected? "
                "type:TfIdentifier TfIdentifier \";\" \"]]\";")));
}

TEST_CASE("TFRule covers non-nullable nonterminals") {
  Grammar cd = load_cd_flat();
  Production tfrule = derive_tfrule(cd, analyze(cd));
  CHECK(structurally_equal(
      tfrule, prod_from("TFRule = ( Definition | CDElement | Class | CDMember | Attribute | "
                        "Method | Parameter | Association | Interface )* Where?;")));

  Grammar nullable = flatten_inheritance(parse_grammar("grammar N { A = \"a\"?; B = \"b\"; }"), {});
  Production t2 = derive_tfrule(nullable, analyze(nullable));
  CHECK(structurally_equal(t2, prod_from("TFRule = ( B )* Where?;")));

  Grammar single = flatten_inheritance(parse_grammar("grammar S { A = \"a\"; }"), {});
  CHECK(structurally_equal(derive_tfrule(single, analyze(single)),
                           prod_from("TFRule = ( A )* Where?;")));

  Grammar all_nullable = flatten_inheritance(parse_grammar("grammar E { A = \"a\"?; }"), {});
  CHECK_THROWS_WITH_AS(derive_tfrule(all_nullable, analyze(all_nullable)),
                       doctest::Contains("empty TFRule alternative"), DeriveError);
}

TEST_CASE("keyword naming handles symbols and clashes") {
  CHECK(keyword_interface_name("abstract") == "Abstract");
  CHECK(keyword_interface_name("+") == "Plus");
  CHECK(keyword_interface_name("->") == "Sym2D3E");

  Grammar clash = flatten_inheritance(
      parse_grammar("grammar C { Assoc = [\"assoc\"]? \"x\"; }"), {});
  auto names = keyword_names(clash, analyze(clash));
  CHECK(names.at("assoc") == "AssocKeyword");

  Grammar stuck = flatten_inheritance(
      parse_grammar("grammar C { Assoc = [\"assoc\"]? \"x\"; AssocKeyword = \"y\"; }"), {});
  CHECK_THROWS_AS(keyword_names(stuck, analyze(stuck)), DeriveError);
}

TEST_CASE("derive_dstl output is valid, complete and deterministic") {
  Grammar cd = parse_grammar(read_file(corpus_path("cd.mc-grammar")));
  DerivedGrammar d = derive_dstl(cd);
  CHECK(d.grammar.name == "CDTrans");
  CHECK(validate(d.grammar).empty());

  // census: (standard + interface nonterminals + keywords) * 4 + 1
  int derived_count = 0;
  for (const auto& p : d.grammar.productions) {
    const auto& prov = d.provenance.at(p.name);
    CHECK(!prov.rule.empty());
    if (prov.rule != "tfcommons") ++derived_count;
  }
  int nts = 0;
  const int kws = 4;
  for (const auto& p : d.source_language.productions)
    if (p.kind != ProdKind::LexicalBuiltin) ++nts;
  CHECK(nts == 9);
  CHECK(derived_count == (nts + kws) * 4 + 1);

  // every nonterminal and keyword contributes its quadruple
  for (const char* base : {"Definition", "CDElement", "Class", "Abstract"}) {
    CHECK(d.grammar.find(base) != nullptr);
    CHECK(d.grammar.find(std::string(base) + "_Pattern") != nullptr);
    CHECK(d.grammar.find(std::string(base) + "_Rep") != nullptr);
    CHECK(d.grammar.find(std::string(base) + "_Neg") != nullptr);
  }

  // self-contained: reparses and revalidates after unparsing
  Grammar reparsed = flatten_inheritance(parse_grammar(unparse_grammar(d.grammar)), {});
  CHECK(validate(reparsed).empty());
  CHECK(structurally_equal(d.grammar, reparsed));

  DerivedGrammar d2 = derive_dstl(cd);
  CHECK(unparse_grammar(d.grammar) == unparse_grammar(d2.grammar));
  CHECK(provenance_sidecar(d) == provenance_sidecar(d2));

  auto prov_roundtrip = parse_provenance(provenance_sidecar(d));
  CHECK(prov_roundtrip.at("Definition_Pattern").rule == "4a");
  CHECK(prov_roundtrip.at("Definition_Pattern").source == "Definition");
  CHECK(prov_roundtrip.at("Abstract_Rep").rule == "2b");
  CHECK(prov_roundtrip.at("Abstract_Rep").source == "abstract");
  CHECK(prov_roundtrip.at("CDElement_Pattern").rule == "4b");
}

TEST_CASE("derive_dstl self-application over the common base grammar") {
  DerivedGrammar d = derive_dstl(tfcommons_grammar());
  CHECK(validate(d.grammar).empty());
  CHECK(d.grammar.find("TFRule") != nullptr);
  Grammar reparsed = flatten_inheritance(parse_grammar(unparse_grammar(d.grammar)), {});
  CHECK(validate(reparsed).empty());
}

TEST_CASE("derive_dstl rejects the empty grammar") {
  CHECK_THROWS_WITH_AS(derive_dstl(parse_grammar("grammar E { A = \"a\"?; }")),
                       doctest::Contains("empty TFRule alternative"), DeriveError);
}
