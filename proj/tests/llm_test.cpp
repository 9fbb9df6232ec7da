#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "cobble/llm.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::TempDir;

Snippet make_snippet(const std::string& text) {
  Snippet s;
  s.id = "0123456789abcdef";
  s.path = "x.c";
  s.text = text;
  return s;
}

TEST(Llm, PromptSectionsInOrder) {
  LlmConfig cfg;
  Snippet sn = make_snippet("int f(int a) { return a; }\n");
  std::string prompt = build_prompt(sn, cfg);

  const char* sections[] = {
      "## Task",          "## Steps",         "## Rules",
      "## Example (good)", "## Example (bad)", "## Output format",
      "## Provided code snippet",
  };
  size_t prev = 0;
  for (const char* s : sections) {
    size_t at = prompt.find(s, prev);
    ASSERT_NE(at, std::string::npos) << "missing section " << s;
    prev = at + 1;
  }
  // The snippet itself lands after the final header, and the placeholder
  // never leaks into the output.
  EXPECT_NE(prompt.find(sn.text, prev), std::string::npos);
  EXPECT_EQ(prompt.find(kSnippetPlaceholder), std::string::npos);
}

TEST(Llm, TemplateOverrideSubstitutesPlaceholder) {
  TempDir td;
  std::string templ = "CUSTOM HEADER\nlook here: {provided_code_snippet}\n";
  {
    std::ofstream out(td.path() / "tmpl.txt");
    out << templ;
  }
  LlmConfig cfg;
  cfg.prompt_template_path = (td.path() / "tmpl.txt").string();
  Snippet sn = make_snippet("int g(void) { return 7; }\n");
  std::string prompt = build_prompt(sn, cfg);
  EXPECT_NE(prompt.find("CUSTOM HEADER"), std::string::npos);
  EXPECT_NE(prompt.find(sn.text), std::string::npos);
  EXPECT_EQ(prompt.find(kSnippetPlaceholder), std::string::npos);
  EXPECT_EQ(prompt.find("## Task"), std::string::npos);
}

TEST(Llm, ExtractSingleCodeBlock) {
  TransformError err = TransformError::None;
  auto one = extract_single_code_block(
      "Sure!\n```c\nint f(void) { return 1; }\n```\nDone.", &err);
  ASSERT_TRUE(one.has_value());
  EXPECT_EQ(*one, "int f(void) { return 1; }\n");

  auto none = extract_single_code_block("no fences here", &err);
  EXPECT_FALSE(none.has_value());
  EXPECT_EQ(err, TransformError::NoCodeBlock);

  auto two = extract_single_code_block(
      "```\nint a;\n```\nand\n```\nint b;\n```\n", &err);
  EXPECT_FALSE(two.has_value());
  EXPECT_EQ(err, TransformError::MultipleCodeBlocks);
}

TEST(Llm, StubModeReadsFixtureFile) {
  TempDir td;
  Snippet sn = make_snippet("int f(int a) { return a; }\n");
  {
    std::ofstream out(td.path() / (sn.id + ".response.txt"));
    out << "Here is the function:\n```c\nint f(int a) {\n    return a + 1;\n}\n```\n";
  }
  LlmConfig cfg;
  cfg.mode = LlmConfig::Mode::Stub;
  cfg.stub_dir = td.path().string();

  TransformResult r = transform_snippet(sn, cfg);
  EXPECT_EQ(r.error, TransformError::None);
  ASSERT_TRUE(r.extracted_code.has_value());
  EXPECT_NE(r.extracted_code->find("return a + 1;"), std::string::npos);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Llm, StubModeMissingFileIsNoCodeBlock) {
  TempDir td;
  LlmConfig cfg;
  cfg.mode = LlmConfig::Mode::Stub;
  cfg.stub_dir = td.path().string();
  TransformResult r = transform_snippet(make_snippet("int f(void);"), cfg);
  EXPECT_EQ(r.error, TransformError::NoCodeBlock);
  EXPECT_FALSE(r.extracted_code.has_value());
}

TEST(Llm, AlignmentViolationIds) {
  EXPECT_TRUE(check_alignment("int f(int a) {\n    return a;\n}\n").empty());

  auto two_fns = check_alignment(
      "int f(void) { return 1; }\nint g(void) { return 2; }\n");
  EXPECT_NE(std::find(two_fns.begin(), two_fns.end(),
                      std::string("not-single-function")),
            two_fns.end());

  auto bad_param = check_alignment(
      "struct S { int x; };\nint f(struct S s) { return s.x; }\n");
  ASSERT_FALSE(bad_param.empty());
  EXPECT_NE(std::find(bad_param.begin(), bad_param.end(),
                      std::string("non-numeric-param")),
            bad_param.end());

  auto bad_ret = check_alignment("int *f(int *p) { return p; }\n");
  EXPECT_NE(std::find(bad_ret.begin(), bad_ret.end(),
                      std::string("non-numeric-return")),
            bad_ret.end());

  auto unsupported = check_alignment("int f(int a, ...) { return a; }\n");
  ASSERT_FALSE(unsupported.empty());
  // Variadics are an unsupported construct, not a grammar error.
  EXPECT_NE(std::find(unsupported.begin(), unsupported.end(),
                      std::string("unsupported-construct")),
            unsupported.end());

  auto broken = check_alignment("int f(int a) { return ; ;");
  ASSERT_FALSE(broken.empty());
  EXPECT_NE(std::find(broken.begin(), broken.end(),
                      std::string("parse-error")),
            broken.end());
}

TEST(Llm, RemoteRetriesThenSucceeds) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_body;
  std::string seen_auth;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                int n = ++hits;
                if (n == 1) {
                  seen_body = req.body;
                  seen_auth = req.get_header_value("Authorization");
                  res.status = 429;
                  res.set_content("slow down", "text/plain");
                  return;
                }
                res.status = 200;
                res.set_content(
                    "{\"choices\":[{\"message\":{\"content\":"
                    "\"```c\\nint f(int a) {\\n    return a * 2;\\n}\\n```\"}}]}",
                    "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread st([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("COBBLE_TEST_KEY", "sk-test-123", 1);
  LlmConfig cfg;
  cfg.mode = LlmConfig::Mode::Remote;
  cfg.endpoint =
      "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "test-model";
  cfg.api_key_env = "COBBLE_TEST_KEY";
  cfg.retry_backoff_ms = {10};

  TransformResult r = transform_snippet(make_snippet("int f(int a);"), cfg);
  server.stop();
  st.join();

  EXPECT_EQ(r.error, TransformError::None);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(hits.load(), 2);
  ASSERT_TRUE(r.extracted_code.has_value());
  EXPECT_NE(r.extracted_code->find("return a * 2;"), std::string::npos);
  // Request shape: model + single user message carrying the prompt.
  EXPECT_NE(seen_body.find("\"model\":\"test-model\""), std::string::npos);
  EXPECT_NE(seen_body.find("\"role\":\"user\""), std::string::npos);
  EXPECT_NE(seen_body.find("## Task"), std::string::npos);
  EXPECT_EQ(seen_auth, "Bearer sk-test-123");
}

TEST(Llm, RemoteExhaustedRetriesReportsRateLimited) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                ++hits;
                res.status = 429;
              });
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread st([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig cfg;
  cfg.mode = LlmConfig::Mode::Remote;
  cfg.endpoint =
      "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.retry_backoff_ms = {5, 5};

  TransformResult r = transform_snippet(make_snippet("int f(void);"), cfg);
  server.stop();
  st.join();

  EXPECT_EQ(r.error, TransformError::RateLimited);
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(r.http_status, 429);
}

}  // namespace
}  // namespace cobble
