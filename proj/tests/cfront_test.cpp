#include <gtest/gtest.h>

#include "cobble/analyze.hpp"
#include "cobble/parser.hpp"
#include "cobble/printer.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::template_function;

TEST(CFront, PrintParsePrintFixedPoint) {
  for (size_t k = 0; k < 24; k++) {
    std::string src = template_function(k);
    FrontResult a = front_process(src);
    ASSERT_TRUE(a.ok()) << "k=" << k;
    FrontResult b = front_process(a.unit->text);
    ASSERT_TRUE(b.ok()) << "k=" << k;
    EXPECT_EQ(a.unit->text, b.unit->text) << "k=" << k;
  }
}

TEST(CFront, NormalizesBracesAndLines) {
  FrontResult fr = front_process(
      "int f(int a){if(a>0)a=a+1;return a;}");
  ASSERT_TRUE(fr.ok());
  EXPECT_EQ(fr.unit->text,
            "int f(int a) {\n"
            "    if (a > 0) {\n"
            "        a = a + 1;\n"
            "    }\n"
            "    return a;\n"
            "}\n");
}

TEST(CFront, StatementLinesMatchNormalizedText) {
  FrontResult fr = front_process(
      "int g[1] = { 1 };\n\nint foo2(int a) {\n    int b;\n    b = g[a];\n"
      "    return b;\n}\n");
  ASSERT_TRUE(fr.ok());
  // Normalized layout: file var on line 1, function on line 3.
  std::vector<int> lines;
  for (const Stmt* s : fr.info.stmts)
    if (s->kind != Stmt::Kind::Compound) lines.push_back(s->span.line);
  EXPECT_EQ(lines, (std::vector<int>{4, 5, 6}));
}

TEST(CFront, TruncatedFunctionFailsParse) {
  ParseResult pr = parse_function(
      "int foo1(int a, int b) {\n    int c = a + b;\n    if (c > 0) {\n");
  EXPECT_FALSE(pr.ok());
  EXPECT_FALSE(pr.diags.empty());
}

TEST(CFront, UnsupportedConstructDiagnosed) {
  EXPECT_FALSE(parse_function("int f(int a, ...) { return a; }").ok());
  EXPECT_FALSE(
      parse_function("int f(int n) { int a[n]; return a[0]; }").ok());
}

TEST(CFront, BasicExprContexts) {
  FrontResult fr = front_process(
      "int g[2] = { 1, 2 };\nint f(int a) {\n    int b;\n    b = g[a];\n"
      "    return b;\n}\n");
  ASSERT_TRUE(fr.ok());
  bool saw_lvalue_b = false, saw_rvalue_a = false, saw_rvalue_index = false;
  for (const BasicExprRef& r : fr.info.basic_exprs) {
    std::string text = print_expr(r.expr);
    if (text == "b" && r.context == BasicExprContext::LvalueTarget)
      saw_lvalue_b = true;
    if (text == "a" && r.context == BasicExprContext::Rvalue)
      saw_rvalue_a = true;
    if (text == "g[a]" && r.context == BasicExprContext::Rvalue)
      saw_rvalue_index = true;
  }
  EXPECT_TRUE(saw_lvalue_b);
  EXPECT_TRUE(saw_rvalue_a);
  EXPECT_TRUE(saw_rvalue_index);
}

TEST(CFront, EnumerationIsSourceOrdered) {
  FrontResult fr = front_process(
      "int f(int a, int b) {\n    int c = a + b;\n    c = c - b;\n"
      "    return c;\n}\n");
  ASSERT_TRUE(fr.ok());
  std::vector<std::pair<int, std::string>> seen;
  for (const BasicExprRef& r : fr.info.basic_exprs)
    seen.push_back({r.stmt->span.line, print_expr(r.expr)});
  for (size_t i = 1; i < seen.size(); i++)
    EXPECT_LE(seen[i - 1].first, seen[i].first) << "i=" << i;
}

TEST(CFront, RenameGlobalsPrefixesFileScopeNames) {
  FrontResult fr = front_process(
      "int counter = 3;\nint bump(int a) {\n    counter = counter + a;\n"
      "    return counter;\n}\n");
  ASSERT_TRUE(fr.ok());
  ParseResult renamed = rename_globals(*fr.unit, fr.info, "fdead_");
  ASSERT_TRUE(renamed.ok());
  EXPECT_EQ(renamed.unit->fn->name, "fdead_bump");
  EXPECT_NE(renamed.unit->text.find("fdead_counter"), std::string::npos);
  // Locals and params stay untouched.
  EXPECT_NE(renamed.unit->text.find("(int a)"), std::string::npos);
  // The renamed unit is itself normalized and analyzable.
  FrontResult again = front_process(renamed.unit->text);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again.unit->text, renamed.unit->text);
}

TEST(CFront, RenameDetectsCapture) {
  FrontResult fr = front_process(
      "int v = 1;\nint f(int pre_v) {\n    return v + pre_v;\n}\n");
  ASSERT_TRUE(fr.ok());
  ParseResult renamed = rename_globals(*fr.unit, fr.info, "pre_");
  EXPECT_FALSE(renamed.ok());
}

TEST(CFront, MetricsAndFlags) {
  FrontResult fr = front_process(template_function(7));  // switch template
  ASSERT_TRUE(fr.ok());
  EXPECT_TRUE(fr.info.has_switch);
  EXPECT_FALSE(fr.info.has_goto);
  EXPECT_GT(fr.info.branches, 0);
  EXPECT_GT(fr.info.loc, 3);

  FrontResult g = front_process(
      "int f(int a) {\n    if (a < 0) {\n        goto out;\n    }\n"
      "    a = a + 1;\nout:\n    return a;\n}\n");
  ASSERT_TRUE(g.ok());
  EXPECT_TRUE(g.info.has_goto);
}

TEST(CFront, WritesObservableTracking) {
  FrontResult fr = front_process(
      "int f(int a) {\n    int x = 1;\n    if (a) {\n        x = 2;\n"
      "    }\n    return x;\n}\n");
  ASSERT_TRUE(fr.ok());
  const Symbol* x = nullptr;
  for (const Symbol* l : fr.info.locals)
    if (l->name == "x") x = l;
  ASSERT_NE(x, nullptr);
  EXPECT_TRUE(x->writes_observable);

  FrontResult nf = front_process(
      "int f(int a) {\n    int x = 1;\n    int y = (x = 2) + a;\n"
      "    return x + y;\n}\n");
  ASSERT_TRUE(nf.ok());
  const Symbol* nx = nullptr;
  for (const Symbol* l : nf.info.locals)
    if (l->name == "x") nx = l;
  ASSERT_NE(nx, nullptr);
  EXPECT_FALSE(nx->writes_observable);
}

TEST(CFront, ProbeEligibilityExcludesCallsAndNestedEffects) {
  FrontResult fr = front_process(
      "int h(int v) {\n    return v;\n}\nint f(int a) {\n    int x = a + 1;\n"
      "    int y = h(a);\n    return x + y;\n}\n");
  ASSERT_TRUE(fr.ok());
  int eligible = 0, ineligible = 0;
  for (const Stmt* s : fr.info.stmts) {
    auto it = fr.info.notes.find(s);
    if (it == fr.info.notes.end()) continue;
    std::string line;
    if (it->second.probe_eligible)
      eligible++;
    else if (s->kind == Stmt::Kind::Decl)
      ineligible++;
  }
  EXPECT_GE(eligible, 2);   // x decl and return
  EXPECT_GE(ineligible, 1); // y decl contains a call
}

TEST(CFront, ClassifyLiteralKinds) {
  auto l1 = classify_literal("42");
  ASSERT_TRUE(l1.has_value());
  EXPECT_EQ(l1->type, Scalar::I32);
  auto l2 = classify_literal("4000000000");
  ASSERT_TRUE(l2.has_value());
  EXPECT_EQ(l2->type, Scalar::I64);
  auto l3 = classify_literal("42u");
  ASSERT_TRUE(l3.has_value());
  EXPECT_EQ(l3->type, Scalar::U32);
  auto l4 = classify_literal("1.5");
  ASSERT_TRUE(l4.has_value());
  EXPECT_EQ(l4->type, Scalar::F64);
}

}  // namespace
}  // namespace cobble
