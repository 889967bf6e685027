// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "dstl/expr.hpp"
#include "fixture.hpp"

using namespace dstl;

namespace {

// Parses a where block through the rule parser and returns the lowered form.
WhereBlock where_of(const std::string& body) {
  const auto& f = CdFixture::get();
  RuleIR ir = f.lower_rule("class $C;\nwhere { " + body + " }");
  REQUIRE(ir.has_where);
  return ir.where;
}

Binding env_with(std::initializer_list<std::pair<std::string, ExprValue>> vars) {
  Binding b;
  for (auto& [k, v] : vars) b.var_env[k] = v;
  return b;
}

}  // namespace

TEST_CASE("string builtins") {
  EvalContext ctx;
  Binding env = env_with({{"$C", ExprValue::node(0)}});

  WhereBlock w = where_of("$x = (\"get\").concat(\"address\");");
  // run only the assignment expression
  CHECK(eval_expr(w.assignments[0].value, env, ctx).str == "getaddress");

  w = where_of("$x = capitalize(\"address\");");
  CHECK(eval_expr(w.assignments[0].value, env, ctx).str == "Address");

  w = where_of("$x = (\"get\").concat(capitalize(\"address\"));");
  CHECK(eval_expr(w.assignments[0].value, env, ctx).str == "getAddress");

  w = where_of("(\"getAddress\").startsWith(\"get\")");
  CHECK(eval_expr(*w.constraint, env, ctx).boolean);
}

TEST_CASE("deepEquals compares structure, not identity") {
  const auto& f = CdFixture::get();
  SyntaxTree model = f.parse_model_file("models/profile_v0.cd");
  EvalContext ctx{&model};

  // Person.address and Group.address are distinct nodes with equal structure
  auto classes = model.root().nodes_in_slot("CDElement");
  const Node* person_address = classes[1]->nodes_in_slot("CDMember")[1];
  const Node* group_purpose = classes[2]->nodes_in_slot("CDMember")[0];
  const Node* group_address = classes[2]->nodes_in_slot("CDMember")[1];
  const Node* person_name = classes[1]->nodes_in_slot("CDMember")[0];
  REQUIRE(person_address->id != group_address->id);

  Binding env = env_with({{"$A1", ExprValue::node(person_address->id)},
                          {"$A2", ExprValue::node(group_address->id)},
                          {"$N", ExprValue::node(person_name->id)},
                          {"$P", ExprValue::node(group_purpose->id)}});
  WhereBlock w = where_of("$A1.deepEquals($A2)");
  CHECK(eval_expr(*w.constraint, env, ctx).boolean);

  // name vs purpose differ structurally; cross-check via token streams
  w = where_of("$N.deepEquals($P)");
  CHECK_FALSE(eval_expr(*w.constraint, env, ctx).boolean);
  CHECK(token_equal(*person_address, *group_address));
  CHECK_FALSE(token_equal(*person_name, *group_purpose));

  // identity comparison differs from structural equality
  w = where_of("$A1 == $A2");
  CHECK_FALSE(eval_expr(*w.constraint, env, ctx).boolean);
  w = where_of("$A1 == $A1");
  CHECK(eval_expr(*w.constraint, env, ctx).boolean);
  w = where_of("!($A1 == $A2) && $A1.deepEquals($A2)");
  CHECK(eval_expr(*w.constraint, env, ctx).boolean);
}

TEST_CASE("run_where extends the environment in order") {
  EvalContext ctx;
  WhereBlock w = where_of(
      "$get = (\"get\").concat(capitalize(\"address\"));"
      "$getter = ($get).concat(\"X\");");
  Binding env;
  auto [extended, ok] = run_where(w, env, ctx);
  CHECK(ok);
  CHECK(extended.var_env.at("$get").str == "getAddress");
  CHECK(extended.var_env.at("$getter").str == "getAddressX");
  CHECK(env.var_env.empty());  // input untouched

  WhereBlock empty;
  auto [same, ok2] = run_where(empty, extended, ctx);
  CHECK(ok2);
  CHECK(same == extended);
}

TEST_CASE("evaluation errors") {
  EvalContext ctx;
  Binding env;
  WhereBlock w = where_of("$missing.deepEquals($missing)");
  CHECK_THROWS_WITH_AS(eval_expr(*w.constraint, env, ctx), doctest::Contains("unbound"),
                       EvalError);

  w = where_of("(\"a\").concat(\"b\" == \"c\")");
  CHECK_THROWS_WITH_AS(eval_expr(*w.constraint, env, ctx), doctest::Contains("type mismatch"),
                       EvalError);

  w = where_of("(\"a\").reverse()");
  CHECK_THROWS_WITH_AS(eval_expr(*w.constraint, env, ctx), doctest::Contains("unknown method"),
                       EvalError);

  // assignment to an already-bound variable is a defensive error
  WhereBlock dup = where_of("$v = \"a\"; $v = \"b\";");
  CHECK_THROWS_WITH_AS(run_where(dup, env, ctx), doctest::Contains("already bound"), EvalError);

  // non-boolean constraint
  w = where_of("(\"just a string\")");
  CHECK_THROWS_WITH_AS(run_where(w, env, ctx), doctest::Contains("not boolean"), EvalError);
}

TEST_CASE("deepEquals is an equivalence relation on model subtrees") {
  const auto& f = CdFixture::get();
  std::mt19937 rng(20240811);
  std::uniform_int_distribution<int> pick_vis(0, 2);
  std::uniform_int_distribution<int> pick_name(0, 3);
  const char* vis[] = {"public ", "private ", ""};
  const char* names[] = {"a", "b", "addr", "x"};

  // small random models give a mix of equal and unequal attribute subtrees
  std::vector<SyntaxTree> models;
  for (int i = 0; i < 12; ++i) {
    std::string src = "classdiagram M {\n  class C {\n";
    for (int j = 0; j < 3; ++j)
      src += std::string("    ") + vis[pick_vis(rng)] + "String " + names[pick_name(rng)] + ";\n";
    src += "  }\n}\n";
    models.push_back(f.parse_model(src));
  }

  std::vector<const Node*> attrs;
  for (auto& m : models)
    for (const Node* c : m.root().nodes_in_slot("CDElement"))
      for (const Node* a : c->nodes_in_slot("CDMember")) attrs.push_back(a);

  int equal_pairs = 0;
  for (const Node* a : attrs) {
    CHECK(deep_equal(*a, *a));  // reflexive
    for (const Node* b : attrs) {
      bool ab = deep_equal(*a, *b);
      CHECK(ab == deep_equal(*b, *a));  // symmetric
      if (ab && a != b) ++equal_pairs;
      // structural equality coincides with token equality for same-typed nodes
      CHECK(ab == token_equal(*a, *b));
      if (!ab) continue;
      for (const Node* c : attrs)
        if (deep_equal(*b, *c)) CHECK(deep_equal(*a, *c));  // transitive
    }
  }
  CHECK(equal_pairs > 0);
}
