#include "core/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "core/error.hpp"
#include "core/sha256.hpp"
#include "core/util.hpp"

namespace solaudit {

std::string request_fingerprint(const ChatRequest& req) {
    nlohmann::json canonical;  // plain json sorts keys, keeping bytes stable
    canonical["model"] = req.model;
    auto messages = nlohmann::json::array();
    for (const ChatMessage& m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    canonical["messages"] = messages;
    canonical["temperature"] = req.temperature;
    canonical["schema"] = req.response_schema ? *req.response_schema : nlohmann::json(nullptr);
    canonical["max_tokens"] = req.max_output_tokens;
    return sha256_hex(canonical.dump());
}

void validate_schema(const nlohmann::json& value, const nlohmann::json& schema,
                     const std::string& path) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        bool ok = (type == "object" && value.is_object()) ||
                  (type == "array" && value.is_array()) ||
                  (type == "string" && value.is_string()) ||
                  (type == "boolean" && value.is_boolean()) ||
                  (type == "integer" && value.is_number_integer()) ||
                  (type == "number" && value.is_number());
        if (!ok) {
            raise(Errc::schema_violation,
                  path + ": expected " + type + ", got " + std::string(value.type_name()));
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& allowed : schema["enum"]) {
            if (value == allowed) {
                found = true;
                break;
            }
        }
        if (!found) {
            raise(Errc::schema_violation, path + ": value " + value.dump() + " not in enum");
        }
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& name : schema["required"]) {
                if (!value.contains(name.get<std::string>())) {
                    raise(Errc::schema_violation,
                          path + ": missing required field '" + name.get<std::string>() + "'");
                }
            }
        }
        if (schema.contains("properties")) {
            for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
                if (value.contains(it.key())) {
                    validate_schema(value[it.key()], it.value(), path + "." + it.key());
                }
            }
        }
        // Unknown fields are accepted and ignored.
    }
    if (value.is_array() && schema.contains("items")) {
        size_t i = 0;
        for (const auto& item : value) {
            validate_schema(item, schema["items"], path + "[" + std::to_string(i) + "]");
            ++i;
        }
    }
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh cache
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            entries_[j.at("fingerprint").get<std::string>()] =
                j.at("response").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::parse, "corrupt cache line in " + path_ + ": " + e.what());
        }
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& fingerprint) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::append(const std::string& fingerprint, const std::string& model,
                           const std::string& raw_response, const std::string& run_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(fingerprint)) return;  // append-only, first write wins
    entries_[fingerprint] = raw_response;

    nlohmann::ordered_json j;
    j["fingerprint"] = fingerprint;
    j["model"] = model;
    j["response"] = raw_response;
    j["timestamp"] = static_cast<int64_t>(std::time(nullptr));
    j["run_id"] = run_id;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        raise(Errc::io, "cannot append to cache: " + path_);
    }
    out << j.dump() << '\n';
}

size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

LlmGateway::LlmGateway(EndpointConfig config, std::shared_ptr<ResponseCache> cache, bool offline,
                       std::string run_id)
    : config_(std::move(config)), cache_(std::move(cache)), offline_(offline),
      run_id_(std::move(run_id)) {
    if (!cache_) {
        raise(Errc::invalid_argument, "gateway requires a response cache");
    }
    if (config_.backoff_factor < 1.0 || config_.max_attempts < 1) {
        raise(Errc::config, "backoff factor must be >= 1 and attempts >= 1");
    }
    if (!offline_) {
        if (config_.base_url.empty()) {
            raise(Errc::config, "endpoint base URL is not configured");
        }
        if (!config_.api_key_env_var.empty()) {
            const char* key = std::getenv(config_.api_key_env_var.c_str());
            if (key && *key) api_key_ = key;
        }
    }
    if (config_.requests_per_second > 0) {
        limiter_ = std::make_unique<TokenBucket>(config_.requests_per_second,
                                                 config_.requests_per_second);
    }
}

std::string LlmGateway::post_with_retries(const std::string& path, const std::string& body,
                                          const std::string& content_type) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    bool last_was_rate_limit = false;
    std::string last_detail;
    double delay_ms = config_.backoff_base_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<int64_t>(delay_ms)));
            delay_ms *= config_.backoff_factor;
        }
        if (limiter_) limiter_->acquire();
        httplib::Result res = client.Post(path, headers, body, content_type);
        if (!res) {
            last_was_rate_limit = false;
            last_detail = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429) {
            last_was_rate_limit = true;
            last_detail = "HTTP 429";
            continue;
        }
        if (res->status >= 500) {
            last_was_rate_limit = false;
            last_detail = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) {
            raise(Errc::bad_request, "endpoint rejected request (HTTP " +
                                         std::to_string(res->status) + "): " + res->body);
        }
        return res->body;
    }
    if (last_was_rate_limit) {
        raise(Errc::rate_limited,
              "rate limited after " + std::to_string(config_.max_attempts) + " attempts");
    }
    raise(Errc::transport, "request failed after " + std::to_string(config_.max_attempts) +
                               " attempts (" + last_detail + ")");
}

std::string LlmGateway::complete_raw(const ChatRequest& req, std::string* fingerprint_out) {
    if (req.messages.empty()) {
        raise(Errc::invalid_argument, "chat request needs at least one message");
    }
    if (req.temperature < 0) {
        raise(Errc::invalid_argument, "temperature must be non-negative");
    }
    std::string fingerprint = request_fingerprint(req);
    if (fingerprint_out) *fingerprint_out = fingerprint;

    if (auto cached = cache_->lookup(fingerprint)) {
        return *cached;
    }
    if (offline_) {
        raise(Errc::cache_miss, "offline mode and no cached response for " + fingerprint);
    }

    nlohmann::ordered_json body;
    body["model"] = req.model;
    body["messages"] = nlohmann::ordered_json::array();
    for (const ChatMessage& m : req.messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    body["temperature"] = req.temperature;
    if (req.max_output_tokens > 0) body["max_tokens"] = req.max_output_tokens;
    if (req.response_schema) {
        body["tools"] = nlohmann::ordered_json::array(
            {{{"type", "function"},
              {"function",
               {{"name", req.function_name}, {"parameters", *req.response_schema}}}}});
        body["tool_choice"] = {{"type", "function"}, {"function", {{"name", req.function_name}}}};
    }

    std::string response = post_with_retries("/v1/chat/completions", body.dump(),
                                             "application/json");
    cache_->append(fingerprint, req.model, response, run_id_);
    return response;
}

namespace {

const nlohmann::json& first_message(const nlohmann::json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        raise(Errc::unparseable_response, "response has no choices: " + body.dump());
    }
    const nlohmann::json& choice = body["choices"][0];
    if (!choice.contains("message")) {
        raise(Errc::unparseable_response, "choice has no message: " + choice.dump());
    }
    return choice["message"];
}

}  // namespace

std::string LlmGateway::chat_complete(const ChatRequest& req) {
    std::string raw = complete_raw(req, nullptr);
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::unparseable_response, std::string("response is not JSON: ") + e.what());
    }
    const nlohmann::json& message = first_message(body);
    if (message.contains("content") && message["content"].is_string()) {
        return message["content"].get<std::string>();
    }
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
        return message["tool_calls"][0]["function"]["arguments"].get<std::string>();
    }
    raise(Errc::unparseable_response, "message has neither content nor tool calls");
}

nlohmann::json LlmGateway::chat_complete_structured(const ChatRequest& req) {
    if (!req.response_schema) {
        raise(Errc::invalid_argument, "structured completion needs a response schema");
    }
    std::string raw = complete_raw(req, nullptr);
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::unparseable_response, std::string("response is not JSON: ") + e.what());
    }
    const nlohmann::json& message = first_message(body);

    std::string args_text;
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
        args_text = message["tool_calls"][0]["function"]["arguments"].get<std::string>();
    } else if (message.contains("content") && message["content"].is_string()) {
        args_text = message["content"].get<std::string>();  // tolerant fallback
    } else {
        raise(Errc::schema_violation, "$: no tool call in response");
    }

    nlohmann::json value;
    try {
        value = nlohmann::json::parse(args_text);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_violation, std::string("$: arguments are not JSON: ") + e.what());
    }
    validate_schema(value, *req.response_schema);
    return value;
}

std::string LlmGateway::replay(const std::string& fingerprint) const {
    auto cached = cache_->lookup(fingerprint);
    if (!cached) {
        raise(Errc::cache_miss, "no cached exchange for fingerprint " + fingerprint);
    }
    return *cached;
}

void validate_chat_dataset(const std::string& path) {
    std::string text = read_file(path);
    int line_no = 0;
    bool any = false;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        any = true;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::upload_rejected,
                  path + ":" + std::to_string(line_no) + ": not JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("messages") || !j["messages"].is_array() ||
            j["messages"].empty()) {
            raise(Errc::upload_rejected,
                  path + ":" + std::to_string(line_no) + ": line needs a messages array");
        }
        for (const auto& m : j["messages"]) {
            if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
                !m["content"].is_string()) {
                raise(Errc::upload_rejected,
                      path + ":" + std::to_string(line_no) + ": malformed message entry");
            }
            std::string role = m["role"].get<std::string>();
            if (role != "system" && role != "user" && role != "assistant") {
                raise(Errc::upload_rejected,
                      path + ":" + std::to_string(line_no) + ": unknown role " + role);
            }
        }
    }
    if (!any) {
        raise(Errc::upload_rejected, path + ": training file is empty");
    }
}

namespace {

JobStatus job_status_from(const std::string& s) {
    if (s == "succeeded") return JobStatus::Succeeded;
    if (s == "failed" || s == "cancelled") return JobStatus::Failed;
    if (s == "running") return JobStatus::Running;
    return JobStatus::Pending;  // validating_files, queued, created, ...
}

FinetuneJob job_from_json(const nlohmann::json& j, const std::string& training_file_id) {
    FinetuneJob job;
    job.job_id = j.at("id").get<std::string>();
    job.training_file_id = training_file_id;
    job.status = job_status_from(j.value("status", std::string{"pending"}));
    if (job.status == JobStatus::Succeeded) {
        if (!j.contains("fine_tuned_model") || j["fine_tuned_model"].is_null()) {
            raise(Errc::job_failed, "job succeeded without a result model: " + j.dump());
        }
        job.result_model = j["fine_tuned_model"].get<std::string>();
    }
    return job;
}

}  // namespace

FinetuneJob LlmGateway::create_finetune(const std::string& training_file,
                                        const std::string& base_model, int epochs) {
    validate_chat_dataset(training_file);  // reject locally before any upload
    if (offline_) {
        raise(Errc::invalid_argument, "cannot create fine-tune jobs in offline mode");
    }

    std::string content = read_file(training_file);
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    httplib::MultipartFormDataItems items = {
        {"purpose", "fine-tune", "", ""},
        {"file", content, "training.jsonl", "application/jsonl"},
    };
    httplib::Result res = client.Post("/v1/files", headers, items);
    if (!res || res->status >= 400) {
        raise(Errc::upload_rejected,
              "file upload failed: " +
                  (res ? "HTTP " + std::to_string(res->status) + " " + res->body
                       : httplib::to_string(res.error())));
    }
    std::string file_id;
    try {
        file_id = nlohmann::json::parse(res->body).at("id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::upload_rejected, std::string("bad upload response: ") + e.what());
    }

    nlohmann::ordered_json body;
    body["training_file"] = file_id;
    body["model"] = base_model;
    body["hyperparameters"] = {{"n_epochs", epochs}};
    std::string response = post_with_retries("/v1/fine_tuning/jobs", body.dump(),
                                             "application/json");
    try {
        return job_from_json(nlohmann::json::parse(response), file_id);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::job_failed, std::string("bad job response: ") + e.what());
    }
}

FinetuneJob LlmGateway::poll(const FinetuneJob& job) {
    if (offline_) {
        raise(Errc::invalid_argument, "cannot poll fine-tune jobs in offline mode");
    }
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    httplib::Result res = client.Get("/v1/fine_tuning/jobs/" + job.job_id, headers);
    if (!res || res->status >= 400) {
        raise(Errc::transport,
              "poll failed: " + (res ? "HTTP " + std::to_string(res->status)
                                     : httplib::to_string(res.error())));
    }
    try {
        return job_from_json(nlohmann::json::parse(res->body), job.training_file_id);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::job_failed, std::string("bad poll response: ") + e.what());
    }
}

}  // namespace solaudit
