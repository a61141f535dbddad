#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "core/prompts.hpp"
#include "core/ratelimit.hpp"

namespace solaudit {

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;  // detection/critic calls stay deterministic
    std::optional<nlohmann::json> response_schema;
    std::string function_name = "report";
    int max_output_tokens = 0;  // 0 = endpoint default
};

// Stable across processes: canonical JSON of (model, messages, schema,
// temperature, max tokens), hashed.
std::string request_fingerprint(const ChatRequest& req);

// Validates `value` against a JSON-schema subset (type, enum, required,
// properties, items). Strict on required fields, tolerant of unknown ones.
// Throws Error{SchemaViolation} naming the offending path.
void validate_schema(const nlohmann::json& value, const nlohmann::json& schema,
                     const std::string& path = "$");

// Append-only response cache, one line-delimited file per run. Lookups hit
// the in-memory index; writes are serialized.
class ResponseCache {
public:
    explicit ResponseCache(std::string path);

    std::optional<std::string> lookup(const std::string& fingerprint) const;
    void append(const std::string& fingerprint, const std::string& model,
                const std::string& raw_response, const std::string& run_id);
    size_t size() const;

private:
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
};

struct EndpointConfig {
    std::string base_url;
    std::string api_key_env_var = "LLM_API_KEY";
    int max_attempts = 5;
    int backoff_base_ms = 1000;
    double backoff_factor = 2.0;
    double requests_per_second = 0.0;  // 0 = unlimited
};

enum class JobStatus { Pending, Running, Succeeded, Failed };

struct FinetuneJob {
    std::string job_id;
    std::string training_file_id;
    JobStatus status = JobStatus::Pending;
    std::optional<std::string> result_model;  // present iff Succeeded
};

// Chat-completions client with response caching. Identical requests are
// served from the cache without touching the network; in offline mode a miss
// is an error instead of a request.
class LlmGateway {
public:
    LlmGateway(EndpointConfig config, std::shared_ptr<ResponseCache> cache,
               bool offline = false, std::string run_id = "");

    // Assistant text (or the tool-call arguments when the server answered a
    // forced tool choice with no content).
    std::string chat_complete(const ChatRequest& req);

    // Tool-call arguments parsed and validated against req.response_schema.
    nlohmann::json chat_complete_structured(const ChatRequest& req);

    // Cache-only lookup; never performs network activity.
    std::string replay(const std::string& fingerprint) const;

    FinetuneJob create_finetune(const std::string& training_file, const std::string& base_model,
                                int epochs);
    FinetuneJob poll(const FinetuneJob& job);

    bool offline() const { return offline_; }

private:
    std::string complete_raw(const ChatRequest& req, std::string* fingerprint_out);
    std::string post_with_retries(const std::string& path, const std::string& body,
                                  const std::string& content_type);
    nlohmann::json http_json(const std::string& method, const std::string& path,
                             const std::string& body, const std::string& content_type);

    EndpointConfig config_;
    std::shared_ptr<ResponseCache> cache_;
    bool offline_;
    std::string run_id_;
    std::string api_key_;
    std::unique_ptr<TokenBucket> limiter_;
};

// Validates a chat fine-tuning file locally: every line must be a
// {"messages":[...]} record with system/user/assistant roles and string
// content. Throws Error{UploadRejected} naming the first bad line.
void validate_chat_dataset(const std::string& path);

}  // namespace solaudit
