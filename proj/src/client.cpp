#include "vaspflow/llm/client.hpp"

#include <charconv>

#include "httplib.h"
#include "nlohmann/json.hpp"
#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::llm {

namespace {

using nlohmann::json;

std::optional<int> parse_index(std::string_view token) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0)
    return std::nullopt;
  return value;
}

}  // namespace

MockScript parse_mock_script(const std::string& text) {
  MockScript script;
  std::optional<std::pair<std::string, int>> current_key;
  bool current_default = false;
  std::string body;
  bool body_started = false;
  bool seen_header = false;

  auto flush = [&] {
    if (!seen_header) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (current_default) {
      script.default_answer = body;
    } else if (current_key) {
      if (!script.entries.emplace(*current_key, body).second)
        throw Error(ErrorKind::ManifestError,
                    "mock script repeats entry (" + current_key->first + ", " +
                        std::to_string(current_key->second) + ")");
    }
    body.clear();
    body_started = false;
  };

  std::size_t line_no = 0;
  for (const auto line_view : detail::split_lines(text)) {
    const std::string line(line_view);
    ++line_no;
    if (line.rfind(">>>", 0) == 0) {
      flush();
      seen_header = true;
      const std::string header = line.substr(3);
      const auto tokens = detail::split_ws(header);
      if (tokens.size() == 1 && tokens[0] == "default") {
        current_default = true;
        current_key.reset();
      } else if (tokens.size() == 2) {
        const auto index = parse_index(tokens[1]);
        if (!index)
          throw Error(ErrorKind::ManifestError,
                      "mock script line " + std::to_string(line_no) +
                          ": invocation index '" + std::string(tokens[1]) +
                          "' is not a non-negative integer");
        current_default = false;
        current_key = {std::string(tokens[0]), *index};
      } else {
        throw Error(ErrorKind::ManifestError,
                    "mock script line " + std::to_string(line_no) +
                        ": expected '>>> template_id index' or '>>> default'");
      }
      continue;
    }
    if (!seen_header) {
      if (line.empty() || line[0] == '#') continue;
      throw Error(ErrorKind::ManifestError,
                  "mock script line " + std::to_string(line_no) +
                      ": content before the first '>>>' header");
    }
    body += line;
    body += '\n';
    body_started = true;
  }
  (void)body_started;
  flush();
  return script;
}

LlmResponse MockScriptClient::complete(const LlmRequest& req) {
  const auto it =
      script_.entries.find({req.template_id, req.invocation_index});
  if (it != script_.entries.end())
    return {it->second, "mock entry (" + req.template_id + ", " +
                            std::to_string(req.invocation_index) + ")"};
  if (script_.default_answer)
    return {*script_.default_answer, "mock default"};
  throw Error(ErrorKind::ProviderError,
              "mock script has no entry for (" + req.template_id + ", " +
                  std::to_string(req.invocation_index) +
                  ") and no default answer");
}

HttpLlmClient::HttpLlmClient(ProviderConfig config)
    : config_(std::move(config)) {
  std::string rest = config_.endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) != 0)
    throw Error(ErrorKind::ConfigError,
                "endpoint must start with http:// (got '" + config_.endpoint +
                    "')");
  rest = rest.substr(scheme.size());
  const auto slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = authority.find(':');
  if (colon == std::string::npos) {
    host_ = authority;
  } else {
    host_ = authority.substr(0, colon);
    const auto port = parse_index(authority.substr(colon + 1));
    if (!port || *port == 0 || *port > 65535)
      throw Error(ErrorKind::ConfigError,
                  "endpoint port in '" + config_.endpoint + "' is invalid");
    port_ = *port;
  }
  if (host_.empty())
    throw Error(ErrorKind::ConfigError,
                "endpoint '" + config_.endpoint + "' has no host");
}

LlmResponse HttpLlmClient::complete(const LlmRequest& req) {
  json body = {
      {"model", req.provider_model.empty() ? config_.model : req.provider_model},
      {"temperature", req.temperature},
      {"max_tokens", req.max_answer_length},
      {"messages",
       json::array({{{"role", "user"}, {"content", req.rendered_prompt}}})},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_failure;
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client client(host_, port_);
    const auto seconds = static_cast<time_t>(config_.timeout_seconds);
    const auto micros = static_cast<time_t>(
        (config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    auto result = client.Post(path_, headers, payload, "application/json");
    if (!result) {
      const auto err = result.error();
      if (err == httplib::Error::ConnectionTimeout ||
          err == httplib::Error::Read)
        throw Error(ErrorKind::Timeout,
                    "provider did not answer within " +
                        std::to_string(config_.timeout_seconds) + "s");
      last_failure = "transport error: " + httplib::to_string(err);
      continue;
    }
    if (result->status >= 500) {
      last_failure = "provider status " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200)
      throw Error(ErrorKind::ProviderError,
                  "provider status " + std::to_string(result->status) + ": " +
                      result->body);
    try {
      const json doc = json::parse(result->body);
      const auto& choices = doc.at("choices");
      if (!choices.is_array() || choices.empty())
        throw Error(ErrorKind::ProviderError, "reply has no choices");
      LlmResponse response;
      response.text = choices.at(0).at("message").at("content").get<std::string>();
      json meta = json::object();
      if (doc.contains("model")) meta["model"] = doc["model"];
      if (doc.contains("id")) meta["id"] = doc["id"];
      if (doc.contains("usage")) meta["usage"] = doc["usage"];
      response.provider_meta = meta.dump();
      return response;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ProviderError,
                  std::string("malformed provider reply: ") + e.what());
    }
  }
  throw Error(ErrorKind::ProviderError, last_failure + " (after one retry)");
}

}  // namespace vaspflow::llm
