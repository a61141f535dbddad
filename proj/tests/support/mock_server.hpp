#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace testutil {

// httplib server on an ephemeral localhost port, stopped on destruction.
class MockServer {
public:
    MockServer() : server_(std::make_unique<httplib::Server>()) {}

    ~MockServer() { stop(); }

    httplib::Server& server() { return *server_; }

    void start() {
        port_ = server_->bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_->listen_after_bind(); });
        server_->wait_until_ready();
    }

    void stop() {
        if (thread_.joinable()) {
            server_->stop();
            thread_.join();
        }
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

// OpenAI-shaped chat-completions reply with plain assistant content.
inline std::string content_reply(const std::string& text) {
    nlohmann::json j = {
        {"choices",
         {{{"message", {{"role", "assistant"}, {"content", text}}}, {"finish_reason", "stop"}}}},
    };
    return j.dump();
}

// Reply whose message carries one forced tool call with the given arguments.
inline std::string tool_reply(const nlohmann::json& arguments,
                              const std::string& name = "report") {
    nlohmann::json j = {
        {"choices",
         {{{"message",
            {{"role", "assistant"},
             {"content", nullptr},
             {"tool_calls",
              {{{"id", "call_1"},
                {"type", "function"},
                {"function", {{"name", name}, {"arguments", arguments.dump()}}}}}}}},
           {"finish_reason", "tool_calls"}}}},
    };
    return j.dump();
}

// A sentinel that fails the test if anything connects to it.
class NetworkSentinel {
public:
    NetworkSentinel() {
        server_.server().Post(".*", [this](const httplib::Request&, httplib::Response& res) {
            hits_.fetch_add(1);
            res.status = 500;
        });
        server_.server().Get(".*", [this](const httplib::Request&, httplib::Response& res) {
            hits_.fetch_add(1);
            res.status = 500;
        });
        server_.start();
    }

    std::string base_url() const { return server_.base_url(); }
    int hits() const { return hits_.load(); }

private:
    MockServer server_;
    std::atomic<int> hits_{0};
};

}  // namespace testutil
