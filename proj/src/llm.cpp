#include "cobble/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "cobble/parser.hpp"
#include "cobble/subprocess.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cobble {

using nlohmann::json;

const char* transform_error_tag(TransformError e) {
  switch (e) {
    case TransformError::None: return "none";
    case TransformError::HttpError: return "http-error";
    case TransformError::Timeout: return "timeout";
    case TransformError::RateLimited: return "rate-limited";
    case TransformError::NoCodeBlock: return "no-code-block";
    case TransformError::MultipleCodeBlocks: return "multiple-code-blocks";
  }
  return "unknown";
}

static const char* kDefaultTemplate =
    R"(You are an expert C programmer with deep knowledge of the C99 standard,
undefined behavior, and portable numeric code.

## Task
Transform the provided real-world code snippet into a single self-contained
C function suitable for automated testing. Keep the original computation
logic recognizable while making the function fully numeric.

## Steps
1. Understand: read the snippet and identify its core computation and the
   data it consumes and produces.
2. Generate: rewrite that computation as one C function whose inputs and
   outputs are all explicit.
3. Verify: re-check your function against every rule below before you
   answer, and fix anything that does not comply.

## Rules
- Parameters and the return value must use only numeric types (char, short,
  int, long long, float, double, their unsigned variants) or pointers to
  such types. No struct parameters, no struct returns, no void return.
- Preserve the original logic wherever possible; simplify only what the
  rules force you to change.
- Define exactly one function. Helper context may be expressed as
  file-scope variables or struct definitions above it, but only one
  function definition may appear.
- The code must be free of undefined behavior for at least some inputs:
  no uninitialized reads, no out-of-bounds accesses on the paths you keep.
- Use only the C features of plain portable C99: no variadics, unions,
  enums, function pointers, VLAs, or preprocessor macros. Standard headers
  like <stdio.h>, <stdlib.h>, <string.h>, <stdint.h> are allowed.

## Example (good)
Snippet:
    static void push_avg(struct ring *r, int v) {
        r->buf[r->n++ & 7] = v;
        r->avg = (r->avg * 3 + v) / 4;
    }
Answer:
    ```c
    int push_avg(int avg, int v) {
        int mixed = avg * 3 + v;
        return mixed / 4;
    }
    ```
Why it is good: one function, numeric parameters and return, and the
smoothing computation is preserved.

## Example (bad)
Snippet:
    const char *tag_name(struct node *n) { return n->tag; }
Answer:
    ```c
    const char *tag_name(struct node *n) { return n->tag; }
    ```
Why it is bad: the parameter is a pointer to a struct and the return type
is a string, so the function's input/output is not numeric; it must be
rewritten around numeric values instead.

## Output format
Reply with exactly one fenced code block containing only the C code. Do
not add code outside the block and do not emit more than one block.

## Provided code snippet
{provided_code_snippet}
)";

std::string build_prompt(const Snippet& snippet, const LlmConfig& config) {
  std::string templ = kDefaultTemplate;
  if (!config.prompt_template_path.empty()) {
    std::string file_text;
    if (read_text_file(config.prompt_template_path, file_text))
      templ = file_text;
  }
  size_t pos = templ.find(kSnippetPlaceholder);
  if (pos == std::string::npos) {
    return templ + "\n## Provided code snippet\n" + snippet.text + "\n";
  }
  std::string out = templ.substr(0, pos);
  out += snippet.text;
  out += templ.substr(pos + strlen(kSnippetPlaceholder));
  return out;
}

std::optional<std::string> extract_single_code_block(std::string_view response,
                                                     TransformError* err) {
  auto set_err = [&](TransformError e) {
    if (err) *err = e;
  };
  std::vector<std::string> blocks;
  bool in_block = false;
  std::string current;
  size_t pos = 0;
  while (pos <= response.size()) {
    size_t eol = response.find('\n', pos);
    std::string_view line = response.substr(
        pos, (eol == std::string_view::npos ? response.size() : eol) - pos);
    std::string_view trimmed = line;
    while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t'))
      trimmed.remove_prefix(1);
    while (!trimmed.empty() &&
           (trimmed.back() == ' ' || trimmed.back() == '\t' ||
            trimmed.back() == '\r'))
      trimmed.remove_suffix(1);
    if (trimmed.substr(0, 3) == "```") {
      if (!in_block) {
        in_block = true;
        current.clear();
      } else {
        in_block = false;
        blocks.push_back(current);
      }
    } else if (in_block) {
      current.append(line);
      current.push_back('\n');
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (blocks.empty()) {
    set_err(TransformError::NoCodeBlock);
    return std::nullopt;
  }
  if (blocks.size() > 1) {
    set_err(TransformError::MultipleCodeBlocks);
    return std::nullopt;
  }
  set_err(TransformError::None);
  return blocks[0];
}

namespace {

struct Endpoint {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;
  bool ok = false;
};

Endpoint parse_endpoint(const std::string& url) {
  Endpoint ep;
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return ep;
  ep.scheme = url.substr(0, scheme_end);
  size_t host_start = scheme_end + 3;
  size_t path_start = url.find('/', host_start);
  std::string hostport = url.substr(
      host_start,
      (path_start == std::string::npos ? url.size() : path_start) - host_start);
  ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  size_t colon = hostport.rfind(':');
  if (colon != std::string::npos) {
    ep.host = hostport.substr(0, colon);
    ep.port = atoi(hostport.c_str() + colon + 1);
  } else {
    ep.host = hostport;
    ep.port = ep.scheme == "https" ? 443 : 80;
  }
  ep.ok = !ep.host.empty() && ep.port > 0;
  return ep;
}

// One POST; classifies transport and status errors.
TransformError do_request(const LlmConfig& config, const std::string& prompt,
                          std::string& response_out, int& status_out,
                          std::string& detail_out) {
  Endpoint ep = parse_endpoint(config.endpoint);
  if (!ep.ok) {
    detail_out = "unparseable endpoint: " + config.endpoint;
    return TransformError::HttpError;
  }
  if (ep.scheme != "http") {
    detail_out = "only http endpoints are supported in this build "
                 "(TLS not compiled in)";
    return TransformError::HttpError;
  }
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(config.timeout_seconds, 0);
  client.set_read_timeout(config.timeout_seconds, 0);
  client.set_write_timeout(config.timeout_seconds, 0);

  json req = {
      {"model", config.model},
      {"max_tokens", config.max_tokens},
      {"temperature", config.temperature},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
  };
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* key = getenv(config.api_key_env.c_str());
    if (key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  httplib::Result res =
      client.Post(ep.path, headers, req.dump(), "application/json");
  if (!res) {
    detail_out = "transport error: " + httplib::to_string(res.error());
    return res.error() == httplib::Error::ConnectionTimeout ||
                   res.error() == httplib::Error::Read ||
                   res.error() == httplib::Error::Write
               ? TransformError::Timeout
               : TransformError::HttpError;
  }
  status_out = res->status;
  if (res->status == 429) {
    detail_out = "rate limited";
    return TransformError::RateLimited;
  }
  if (res->status != 200) {
    detail_out = "http status " + std::to_string(res->status);
    return TransformError::HttpError;
  }
  json body = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.contains("choices") ||
      !body["choices"].is_array() || body["choices"].empty()) {
    detail_out = "malformed completion body";
    return TransformError::HttpError;
  }
  const json& msg = body["choices"][0];
  if (!msg.contains("message") || !msg["message"].contains("content") ||
      !msg["message"]["content"].is_string()) {
    detail_out = "completion without message content";
    return TransformError::HttpError;
  }
  response_out = msg["message"]["content"].get<std::string>();
  return TransformError::None;
}

}  // namespace

TransformResult transform_snippet(const Snippet& snippet,
                                  const LlmConfig& config) {
  TransformResult result;
  result.snippet_id = snippet.id;

  if (config.mode == LlmConfig::Mode::Stub) {
    result.attempts = 1;
    std::string path = config.stub_dir + "/" + snippet.id + ".response.txt";
    std::string text;
    if (!read_text_file(path, text)) text.clear();
    result.raw_response = text;
  } else {
    std::string prompt = build_prompt(snippet, config);
    size_t max_attempts = config.retry_backoff_ms.size() + 1;
    for (size_t attempt = 0; attempt < max_attempts; attempt++) {
      result.attempts = (int)attempt + 1;
      std::string response;
      int status = 0;
      std::string detail;
      TransformError err =
          do_request(config, prompt, response, status, detail);
      result.http_status = status;
      result.detail = detail;
      if (err == TransformError::None) {
        result.raw_response = response;
        result.error = TransformError::None;
        break;
      }
      result.error = err;
      bool retryable = err == TransformError::RateLimited ||
                       err == TransformError::Timeout ||
                       (err == TransformError::HttpError && status >= 500);
      if (!retryable || attempt + 1 == max_attempts) return result;
      std::fprintf(stderr,
                   "llm: %s for %s (attempt %d), retrying in %d ms\n",
                   transform_error_tag(err), snippet.id.c_str(),
                   result.attempts, config.retry_backoff_ms[attempt]);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config.retry_backoff_ms[attempt]));
    }
  }

  TransformError extract_err = TransformError::None;
  std::optional<std::string> code =
      extract_single_code_block(result.raw_response, &extract_err);
  if (!code) {
    result.error = extract_err;
    return result;
  }
  result.extracted_code = std::move(*code);
  result.error = TransformError::None;
  result.violations = check_alignment(*result.extracted_code);
  return result;
}

static void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

std::vector<std::string> check_alignment(std::string_view code) {
  std::vector<std::string> out;
  ParseResult pr = parse_function(code);
  if (!pr.ok()) {
    for (const Diagnostic& d : pr.diags) {
      if (d.kind == Diagnostic::Kind::Unsupported) {
        if (d.construct == "multiple function definitions")
          add_unique(out, "not-single-function");
        else
          add_unique(out, "unsupported-construct");
      } else {
        if (d.message == "no function definition")
          add_unique(out, "not-single-function");
        else
          add_unique(out, "parse-error");
      }
    }
    return out;
  }
  const FunctionDef* fn = pr.unit->fn;
  for (const Param& p : fn->params) {
    if (!p.type->is_numeric_or_ptr()) add_unique(out, "non-numeric-param");
  }
  if (!fn->return_type->is_arith()) add_unique(out, "non-numeric-return");
  return out;
}

}  // namespace cobble
