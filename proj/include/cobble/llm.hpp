#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobble/corpus.hpp"

namespace cobble {

struct LlmConfig {
  enum class Mode { Remote, Stub };
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "default";
  int max_tokens = 512;
  double temperature = 0.7;
  std::string api_key_env = "COBBLE_API_KEY";
  Mode mode = Mode::Stub;
  std::string stub_dir;  // fixture responses, <snippet-id>.response.txt
  std::string prompt_template_path;  // optional override template
  // Sleeps before retry k; size bounds the retries (so attempts is
  // retry_backoff_ms.size() + 1). Tests shrink these to keep fast.
  std::vector<int> retry_backoff_ms = {1000, 4000, 16000};
  int timeout_seconds = 120;
};

enum class TransformError {
  None,
  HttpError,
  Timeout,
  RateLimited,
  NoCodeBlock,
  MultipleCodeBlocks,
};
const char* transform_error_tag(TransformError e);

struct TransformResult {
  std::string snippet_id;
  std::string raw_response;
  std::optional<std::string> extracted_code;  // iff exactly one fenced block
  std::vector<std::string> violations;        // alignment rule ids
  TransformError error = TransformError::None;
  int http_status = 0;
  int attempts = 0;
  std::string detail;
};

// Placeholder the snippet is substituted at, in both the built-in prompt
// template and user overrides.
inline constexpr const char* kSnippetPlaceholder = "{provided_code_snippet}";

// Assembles the transformation prompt: role framing, task description,
// ordered steps, alignment rules, few-shot examples (positive and
// negative), output-format constraint, then the snippet at the
// placeholder. A template override replaces everything but the
// substitution rule.
std::string build_prompt(const Snippet& snippet, const LlmConfig& config);

// Finds the unique ``` fenced block. err (optional) receives NoCodeBlock
// or MultipleCodeBlocks on failure.
std::optional<std::string> extract_single_code_block(std::string_view response,
                                                     TransformError* err);

// Runs the prompt through the configured backend and screens the reply.
// Stub mode reads <stub_dir>/<snippet-id>.response.txt (missing file acts
// as an empty response). Remote mode POSTs an OpenAI-style chat
// completion and retries on 429/5xx/timeouts per retry_backoff_ms.
TransformResult transform_snippet(const Snippet& snippet,
                                  const LlmConfig& config);

// Violation ids: not-single-function, non-numeric-param,
// non-numeric-return, unsupported-construct, parse-error. Empty list
// means the code is syntactically aligned.
std::vector<std::string> check_alignment(std::string_view code);

}  // namespace cobble
