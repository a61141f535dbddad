#pragma once

#include <stdexcept>
#include <string>

namespace solaudit {

enum class Errc {
    invalid_argument,
    io,
    parse,
    unterminated_block_comment,
    unterminated_string,
    unverified,
    rate_limited,
    transport,
    bad_request,
    schema_violation,
    cache_miss,
    unparseable_response,
    config,
    unknown_detector_id,
    malformed_report,
    missing_gold,
    duplicate_prediction,
    no_support,
    upload_rejected,
    job_failed,
    inconsistent_critic_status,
    internal,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}
    Error(Errc code, std::string message, int line)
        : std::runtime_error(std::move(message)), code_(code), line_(line) {}

    Errc code() const { return code_; }
    int line() const { return line_; }  // 1-based; 0 when not applicable

private:
    Errc code_;
    int line_ = 0;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

}  // namespace solaudit
