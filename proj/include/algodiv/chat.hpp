#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "algodiv/judge.hpp"

namespace algodiv {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl parse_endpoint_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint url needs a scheme: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

struct ChatOptions {
    std::string endpoint_url;
    std::string api_key;           // empty: taken from $ALGODIV_API_KEY
    int max_retries = 3;           // transport-level, per request
    int initial_backoff_ms = 200;  // doubles per retry
    int request_timeout_ms = 60000;
    int concurrency_limit = 4;
    std::size_t request_cap = 0;   // total HTTP requests this client may send; 0 = unlimited
};

// The hard budget guard tripped: no request was sent.
class RequestCapExceeded : public std::runtime_error {
public:
    explicit RequestCapExceeded(std::size_t cap)
        : std::runtime_error("request cap of " + std::to_string(cap) + " requests exhausted") {}
};

// Minimal chat-completions client: POSTs the industry-standard request body
// (model, messages, temperature, top_p, max_tokens) and returns the first
// choice's message content. Retries transport failures and 429/5xx with
// exponential backoff; other HTTP errors fail fast. Thread-safe; concurrent
// requests are bounded by concurrency_limit and counted against request_cap.
class ChatClient {
public:
    explicit ChatClient(ChatOptions options)
        : options_(std::move(options)),
          semaphore_(std::max(1, options_.concurrency_limit)) {
        if (options_.endpoint_url.empty())
            throw std::invalid_argument("ChatClient: endpoint_url is required");
        if (options_.api_key.empty()) {
            if (const char* key = std::getenv("ALGODIV_API_KEY")) options_.api_key = key;
        }
        const ParsedUrl parsed = parse_endpoint_url(options_.endpoint_url);
        base_ = parsed.base;
        path_ = parsed.path;
    }

    std::string complete(const std::string& model, const std::string& user_prompt,
                         double temperature, double top_p, int max_tokens) {
        const json body = {{"model", model},
                           {"messages", json::array({json{{"role", "user"},
                                                          {"content", user_prompt}}})},
                           {"temperature", temperature},
                           {"top_p", top_p},
                           {"max_tokens", max_tokens}};
        const std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0) {
                const auto backoff = std::chrono::milliseconds(
                        static_cast<long long>(options_.initial_backoff_ms) << (attempt - 1));
                std::this_thread::sleep_for(backoff);
            }
            take_budget();
            std::counting_semaphore<>& sem = semaphore_;
            sem.acquire();
            struct Release {
                std::counting_semaphore<>& s;
                ~Release() { s.release(); }
            } release{sem};

            httplib::Client cli(base_);
            cli.set_connection_timeout(std::chrono::milliseconds(options_.request_timeout_ms));
            cli.set_read_timeout(std::chrono::milliseconds(options_.request_timeout_ms));
            cli.set_write_timeout(std::chrono::milliseconds(options_.request_timeout_ms));
            httplib::Headers headers;
            if (!options_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + options_.api_key);

            const auto res = cli.Post(path_, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) {
                const json reply = json::parse(res->body, nullptr, false);
                if (reply.is_discarded() || !reply.contains("choices") ||
                    reply["choices"].empty()) {
                    last_error = "malformed completion response";
                    continue;
                }
                const json& msg = reply["choices"][0];
                if (msg.contains("message") && msg["message"].contains("content"))
                    return msg["message"]["content"].get<std::string>();
                last_error = "completion response missing message content";
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            throw std::runtime_error("chat endpoint rejected request: HTTP " +
                                     std::to_string(res->status) + " " +
                                     res->body.substr(0, 200));
        }
        throw std::runtime_error("chat request failed after " +
                                 std::to_string(options_.max_retries + 1) + " attempts (" +
                                 last_error + ")");
    }

    std::size_t requests_made() const { return requests_.load(); }
    const ChatOptions& options() const { return options_; }

private:
    void take_budget() {
        if (options_.request_cap == 0) {
            requests_.fetch_add(1);
            return;
        }
        std::size_t n = requests_.load();
        do {
            if (n >= options_.request_cap) throw RequestCapExceeded(options_.request_cap);
        } while (!requests_.compare_exchange_weak(n, n + 1));
    }

    ChatOptions options_;
    std::string base_;
    std::string path_;
    std::atomic<std::size_t> requests_{0};
    std::counting_semaphore<> semaphore_;
};

// Adapts a ChatClient to the judge's CompletionSource interface with fixed
// model and sampling parameters.
class HttpCompletionSource : public CompletionSource {
public:
    HttpCompletionSource(ChatClient& client, std::string model, double temperature = 0.0,
                         double top_p = 1.0, int max_tokens = 1024)
        : client_(client),
          model_(std::move(model)),
          temperature_(temperature),
          top_p_(top_p),
          max_tokens_(max_tokens) {}

    std::string complete(const std::string& prompt) override {
        return client_.complete(model_, prompt, temperature_, top_p_, max_tokens_);
    }

private:
    ChatClient& client_;
    std::string model_;
    double temperature_;
    double top_p_;
    int max_tokens_;
};

}  // namespace algodiv
