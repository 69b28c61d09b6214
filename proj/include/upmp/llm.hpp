#pragma once

#include <chrono>
#include <string>

#include "upmp/prompt.hpp"

namespace upmp {

class LlmTransportError : public Error {
public:
    using Error::Error;
};

class LlmConfigError : public Error {
public:
    using Error::Error;
};

/// Chat-completions endpoint settings. Sampling parameters are never sent, so
/// the provider defaults apply.
struct LlmConfig {
    /// Full URL, e.g. "https://api.openai.com/v1/chat/completions".
    std::string endpoint = "http://127.0.0.1:11434/v1/chat/completions";
    std::string model = "qwen2.5-coder:32b";
    std::chrono::milliseconds request_timeout{180000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};
    /// Environment variable holding the bearer token.
    std::string api_key_env = "UPMP_LLM_API_KEY";
};

/// True for http(s)://localhost, 127.x.x.x and [::1] endpoints.
bool is_loopback_endpoint(const std::string& endpoint);

/// Reads the credential named by `api_key_env`. Loopback endpoints may run
/// without one (returns ""); any other endpoint throws LlmConfigError.
std::string resolve_api_key(const LlmConfig& config);

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Returns the assistant text. Throws LlmTransportError.
    virtual std::string complete(const PromptBundle& bundle) = 0;
};

/// POSTs {"model", "messages":[{"role":"user","content":<rendered bundle>}]}
/// and returns choices[0].message.content. Network errors, timeouts and
/// non-2xx replies are retried with exponential backoff.
class HttpLlmClient final : public LlmClient {
public:
    /// Resolves credentials immediately; throws LlmConfigError.
    explicit HttpLlmClient(LlmConfig config);
    std::string complete(const PromptBundle& bundle) override;

    [[nodiscard]] int attempts_made() const { return attempts_; }

private:
    LlmConfig config_;
    std::string api_key_;
    std::string base_;
    std::string path_;
    int attempts_ = 0;
};

/// One-shot helper around HttpLlmClient.
std::string llm_complete(const PromptBundle& bundle, const LlmConfig& config);

}  // namespace upmp
