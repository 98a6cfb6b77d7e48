#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace vaspflow::llm {

/// One completion request. template_id and invocation_index are addressing
/// metadata for the scripted mock and never go over the wire; the index is
/// handed in by the caller (the execution context owns the counter), which
/// keeps every client stateless and safe to share between runs.
struct LlmRequest {
  std::string rendered_prompt;
  double temperature = 0.0;
  int max_answer_length = 4096;
  std::string provider_model;
  std::string template_id;
  int invocation_index = 0;
};

struct LlmResponse {
  std::string text;
  std::string provider_meta;  // opaque diagnostics, shape not stable
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// ProviderError after the single transient retry; Timeout on deadline.
  virtual LlmResponse complete(const LlmRequest& req) = 0;
};

/// Canned answers keyed by (template id, invocation index). With no
/// default_answer a miss is the mock's ProviderError equivalent.
struct MockScript {
  std::map<std::pair<std::string, int>, std::string> entries;
  std::optional<std::string> default_answer;
};

/// Script file format, line oriented:
///   >>> template_id index
///   ...answer lines, verbatim...
///   >>> default
///   ...fallback answer...
/// The answer is everything between one '>>>' header and the next, without
/// the final newline. '#' comment lines are allowed before the first header.
MockScript parse_mock_script(const std::string& text);

class MockScriptClient : public LlmClient {
 public:
  explicit MockScriptClient(MockScript script) : script_(std::move(script)) {}
  LlmResponse complete(const LlmRequest& req) override;

 private:
  MockScript script_;
};

/// Chat-completions provider access. endpoint is a full http URL, e.g.
/// "http://gateway.local:8080/v1/chat/completions"; https termination is out
/// of scope (run a local gateway for TLS providers). One retry on transport
/// errors and 5xx; a deadline overrun is Timeout and is not retried.
struct ProviderConfig {
  std::string endpoint;
  std::string model;
  std::string api_key;
  double timeout_seconds = 30.0;
};

class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(ProviderConfig config);
  LlmResponse complete(const LlmRequest& req) override;

 private:
  ProviderConfig config_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

}  // namespace vaspflow::llm
