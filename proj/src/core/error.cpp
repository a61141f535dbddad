#include "core/error.hpp"

namespace solaudit {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::io: return "Io";
        case Errc::parse: return "Parse";
        case Errc::unterminated_block_comment: return "UnterminatedBlockComment";
        case Errc::unterminated_string: return "UnterminatedString";
        case Errc::unverified: return "Unverified";
        case Errc::rate_limited: return "RateLimited";
        case Errc::transport: return "Transport";
        case Errc::bad_request: return "BadRequest";
        case Errc::schema_violation: return "SchemaViolation";
        case Errc::cache_miss: return "CacheMiss";
        case Errc::unparseable_response: return "UnparseableResponse";
        case Errc::config: return "Config";
        case Errc::unknown_detector_id: return "UnknownDetectorId";
        case Errc::malformed_report: return "MalformedReport";
        case Errc::missing_gold: return "MissingGold";
        case Errc::duplicate_prediction: return "DuplicatePrediction";
        case Errc::no_support: return "NoSupport";
        case Errc::upload_rejected: return "UploadRejected";
        case Errc::job_failed: return "JobFailed";
        case Errc::inconsistent_critic_status: return "InconsistentCriticStatus";
        case Errc::internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace solaudit
