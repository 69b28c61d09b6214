#include "upmp/llm.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "upmp/json_io.hpp"

namespace upmp {

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string host;
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw LlmConfigError("endpoint '" + url + "' lacks a scheme");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw LlmConfigError("endpoint scheme must be http or https, got '" + scheme + "'");
    }
    const auto authority_start = scheme_end + 3;
    const auto path_start = url.find('/', authority_start);
    SplitUrl out;
    out.base = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    std::string authority = url.substr(authority_start, path_start - authority_start);
    if (!authority.empty() && authority.front() == '[') {
        out.host = authority.substr(1, authority.find(']') - 1);
    } else {
        out.host = authority.substr(0, authority.find(':'));
    }
    if (out.host.empty()) {
        throw LlmConfigError("endpoint '" + url + "' has no host");
    }
    return out;
}

}  // namespace

bool is_loopback_endpoint(const std::string& endpoint) {
    const std::string host = split_url(endpoint).host;
    return host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

std::string resolve_api_key(const LlmConfig& config) {
    const char* value = config.api_key_env.empty() ? nullptr : std::getenv(config.api_key_env.c_str());
    if (value && *value) return value;
    if (is_loopback_endpoint(config.endpoint)) return {};
    throw LlmConfigError("no credentials: set " + (config.api_key_env.empty() ? std::string("an API key variable")
                                                                              : config.api_key_env) +
                         " for endpoint " + config.endpoint);
}

HttpLlmClient::HttpLlmClient(LlmConfig config) : config_(std::move(config)) {
    const SplitUrl url = split_url(config_.endpoint);
    base_ = url.base;
    path_ = url.path;
    api_key_ = resolve_api_key(config_);
    if (config_.max_retries < 0) {
        throw LlmConfigError("max_retries must be non-negative");
    }
}

std::string HttpLlmClient::complete(const PromptBundle& bundle) {
    Json body;
    body["model"] = config_.model;
    body["messages"] = Json::array({Json{{"role", "user"}, {"content", bundle.render()}}});
    const std::string payload = body.dump(-1, ' ', false, Json::error_handler_t::replace);

    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        ++attempts_;
        httplib::Client client(base_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
            continue;
        }
        try {
            const Json reply = Json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            last_error = std::string("unexpected reply body: ") + e.what();
        }
    }
    throw LlmTransportError("LLM request to " + config_.endpoint + " failed after " +
                            std::to_string(config_.max_retries + 1) + " attempt(s): " + last_error);
}

std::string llm_complete(const PromptBundle& bundle, const LlmConfig& config) {
    HttpLlmClient client(config);
    return client.complete(bundle);
}

}  // namespace upmp
