#include "core/explorer.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

// Etherscan wraps multi-file uploads in an extra pair of braces.
std::string flatten_source(const std::string& source_code) {
    std::string text = trim(source_code);
    if (text.empty() || text.front() != '{') return source_code;

    std::string json_text = text;
    if (text.size() >= 4 && text[0] == '{' && text[1] == '{') {
        json_text = text.substr(1, text.size() - 2);
    }
    nlohmann::ordered_json parsed;
    try {
        parsed = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception&) {
        return source_code;  // brace-initial single-file source, keep verbatim
    }
    nlohmann::ordered_json sources =
        parsed.contains("sources") ? parsed["sources"] : parsed;
    if (!sources.is_object()) return source_code;

    std::string out;
    for (auto it = sources.begin(); it != sources.end(); ++it) {
        out += "// ---- file: " + it.key() + " ----\n";
        if (it.value().is_object() && it.value().contains("content")) {
            out += it.value()["content"].get<std::string>();
        } else if (it.value().is_string()) {
            out += it.value().get<std::string>();
        }
        if (!out.empty() && out.back() != '\n') out += '\n';
    }
    return out;
}

bool mentions_rate_limit(const nlohmann::json& body) {
    if (!body.is_object()) return false;
    std::string text;
    if (body.contains("result") && body["result"].is_string()) {
        text += body["result"].get<std::string>();
    }
    if (body.contains("message") && body["message"].is_string()) {
        text += " " + body["message"].get<std::string>();
    }
    return to_lower(text).find("rate limit") != std::string::npos;
}

}  // namespace

ExplorerClient::ExplorerClient(CorpusConfig config) : config_(std::move(config)) {
    if (config_.explorer_base_url.empty()) {
        raise(Errc::config, "explorer base URL is not configured");
    }
    if (config_.backoff_factor < 1.0 || config_.max_attempts < 1) {
        raise(Errc::config, "backoff factor must be >= 1 and attempts >= 1");
    }
    if (!config_.api_key_env_var.empty()) {
        const char* key = std::getenv(config_.api_key_env_var.c_str());
        if (!key || !*key) {
            raise(Errc::config,
                  "API key environment variable " + config_.api_key_env_var + " is not set");
        }
        api_key_ = key;
    }
}

ContractRecord ExplorerClient::fetch_verified_source(const std::string& address) const {
    if (!is_contract_address(address)) {
        raise(Errc::invalid_argument, "malformed contract address: " + address);
    }

    httplib::Client client(config_.explorer_base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);

    std::string path = "/api?module=contract&action=getsourcecode&address=" + address;
    if (!api_key_.empty()) path += "&apikey=" + api_key_;

    bool last_was_rate_limit = false;
    std::string last_detail;
    double delay_ms = config_.backoff_base_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<int64_t>(delay_ms)));
            delay_ms *= config_.backoff_factor;
        }
        httplib::Result res = client.Get(path);
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
        if (res->status != 200) {
            raise(Errc::transport,
                  "explorer returned HTTP " + std::to_string(res->status) + " for " + address);
        }

        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::transport, std::string("explorer returned non-JSON body: ") + e.what());
        }
        if (mentions_rate_limit(body)) {
            last_was_rate_limit = true;
            last_detail = "explorer rate limit message";
            continue;
        }
        if (!body.contains("result") || !body["result"].is_array() || body["result"].empty()) {
            raise(Errc::transport, "explorer response has no result entry for " + address);
        }
        const nlohmann::json& entry = body["result"][0];
        std::string source = entry.value("SourceCode", std::string{});
        if (source.empty()) {
            raise(Errc::unverified, "contract source is not verified: " + address);
        }

        ContractRecord record;
        record.address = address;
        record.raw_source = flatten_source(source);
        record.solc_version = entry.value("CompilerVersion", std::string{});
        return record;
    }

    if (last_was_rate_limit) {
        raise(Errc::rate_limited, "rate limited after " + std::to_string(config_.max_attempts) +
                                      " attempts fetching " + address);
    }
    raise(Errc::transport, "fetch failed after " + std::to_string(config_.max_attempts) +
                               " attempts (" + last_detail + ") for " + address);
}

}  // namespace solaudit
