// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "dstl/derive.hpp"
#include "dstl/parser.hpp"
#include "dstl/rule_ir.hpp"
#include "test_support.hpp"

/// Shared class-diagram toolchain: grammar, derived language, parsers.
struct CdFixture {
  dstl::DerivedGrammar d;
  dstl::GrammarFacts tl_facts;
  std::unique_ptr<dstl::Parser> model_parser;
  std::unique_ptr<dstl::Parser> rule_parser;

  CdFixture()
      : d(dstl::derive_dstl(dstl::parse_grammar(read_file(corpus_path("cd.mc-grammar"))))),
        tl_facts(dstl::analyze(d.grammar)) {
    model_parser = std::make_unique<dstl::Parser>(d.source_language, d.source_facts);
    rule_parser = std::make_unique<dstl::Parser>(d.grammar, tl_facts);
  }

  static const CdFixture& get() {
    static CdFixture f;
    return f;
  }

  dstl::SyntaxTree parse_model(const std::string& text) const {
    return model_parser->parse(text, "Definition");
  }
  dstl::SyntaxTree parse_model_file(const std::string& rel) const {
    return parse_model(read_file(corpus_path(rel)));
  }
  dstl::SyntaxTree parse_rule(const std::string& text) const {
    return rule_parser->parse(text, "TFRule");
  }
  dstl::RuleIR lower_rule(const std::string& text) const {
    auto tree = parse_rule(text);
    return dstl::lower_to_ir(tree, d);
  }
  dstl::RuleIR lower_rule_file(const std::string& rel) const {
    return lower_rule(read_file(corpus_path(rel)));
  }
};
