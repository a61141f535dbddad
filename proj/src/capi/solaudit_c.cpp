#include "solaudit/solaudit.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"

#include "core/bpe.hpp"
#include "core/config.hpp"
#include "core/detectors.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"
#include "core/text_clean.hpp"
#include "core/util.hpp"

using namespace solaudit;

namespace {

thread_local std::string g_last_error;

solaudit_status status_from(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return SOLAUDIT_ERR_INVALID_ARGUMENT;
        case Errc::io: return SOLAUDIT_ERR_IO;
        case Errc::parse: return SOLAUDIT_ERR_PARSE;
        case Errc::unterminated_block_comment: return SOLAUDIT_ERR_UNTERMINATED_COMMENT;
        case Errc::unterminated_string: return SOLAUDIT_ERR_UNTERMINATED_STRING;
        case Errc::unverified: return SOLAUDIT_ERR_UNVERIFIED;
        case Errc::rate_limited: return SOLAUDIT_ERR_RATE_LIMITED;
        case Errc::transport: return SOLAUDIT_ERR_TRANSPORT;
        case Errc::bad_request: return SOLAUDIT_ERR_BAD_REQUEST;
        case Errc::schema_violation: return SOLAUDIT_ERR_SCHEMA_VIOLATION;
        case Errc::cache_miss: return SOLAUDIT_ERR_CACHE_MISS;
        case Errc::unparseable_response: return SOLAUDIT_ERR_UNPARSEABLE_RESPONSE;
        case Errc::config: return SOLAUDIT_ERR_CONFIG;
        case Errc::unknown_detector_id: return SOLAUDIT_ERR_UNKNOWN_DETECTOR_ID;
        case Errc::malformed_report: return SOLAUDIT_ERR_MALFORMED_REPORT;
        case Errc::missing_gold: return SOLAUDIT_ERR_MISSING_GOLD;
        case Errc::duplicate_prediction: return SOLAUDIT_ERR_DUPLICATE_PREDICTION;
        case Errc::no_support: return SOLAUDIT_ERR_NO_SUPPORT;
        case Errc::upload_rejected: return SOLAUDIT_ERR_UPLOAD_REJECTED;
        case Errc::job_failed: return SOLAUDIT_ERR_JOB_FAILED;
        case Errc::inconsistent_critic_status: return SOLAUDIT_ERR_INCONSISTENT_CRITIC;
        case Errc::internal: return SOLAUDIT_ERR_INTERNAL;
    }
    return SOLAUDIT_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** slot, const std::string& value) {
    if (slot) *slot = dup_string(value);
}

template <typename Fn>
solaudit_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SOLAUDIT_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_from(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SOLAUDIT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SOLAUDIT_ERR_INTERNAL;
    }
}

solaudit_status require(bool ok, const char* message) {
    if (ok) return SOLAUDIT_OK;
    g_last_error = message;
    return SOLAUDIT_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct solaudit_tokenizer {
    std::shared_ptr<Gpt2Bpe> bpe;
};

struct solaudit_ctx {
    RunConfig config;
};

extern "C" {

const char* solaudit_version(void) { return "0.1.0"; }

const char* solaudit_last_error(void) { return g_last_error.c_str(); }

void solaudit_string_free(char* s) { std::free(s); }

solaudit_status solaudit_strip_comments(const char* source, char** out, int* error_line) {
    if (auto bad = require(source && out, "source and out must be non-NULL")) return bad;
    if (error_line) *error_line = 0;
    return guarded([&] {
        try {
            set_out(out, strip_comments(source));
        } catch (const Error& e) {
            if (error_line) *error_line = e.line();
            throw;
        }
    });
}

solaudit_status solaudit_collapse_blank_lines(const char* source, char** out) {
    if (auto bad = require(source && out, "source and out must be non-NULL")) return bad;
    return guarded([&] { set_out(out, collapse_blank_lines(source)); });
}

solaudit_status solaudit_tokenizer_open(const char* data_dir, solaudit_tokenizer** out) {
    if (auto bad = require(data_dir && out, "data_dir and out must be non-NULL")) return bad;
    return guarded([&] { *out = new solaudit_tokenizer{Gpt2Bpe::load_dir(data_dir)}; });
}

solaudit_status solaudit_tokenizer_count(const solaudit_tokenizer* tok, const char* text,
                                         uint64_t* count) {
    if (auto bad = require(tok && text && count, "tok, text and count must be non-NULL")) {
        return bad;
    }
    return guarded([&] { *count = tok->bpe->count(text); });
}

void solaudit_tokenizer_close(solaudit_tokenizer* tok) { delete tok; }

solaudit_status solaudit_parse_detection_output(const char* text, char** labels_csv,
                                                int* vacuous) {
    if (auto bad = require(text && labels_csv, "text and labels_csv must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        ParsedDetection parsed = parse_detection_output(text, SwcMapping::defaults());
        std::string csv;
        for (const std::string& abbrev : parsed.labels.abbrevs()) {
            if (!csv.empty()) csv += ',';
            csv += abbrev;
        }
        if (vacuous) *vacuous = parsed.vacuous ? 1 : 0;
        set_out(labels_csv, csv);
    });
}

solaudit_status solaudit_gptlens_rank(double correctness, double severity, double profitability,
                                      double wc, double ws, double wp, double* final_score) {
    if (auto bad = require(final_score != nullptr, "final_score must be non-NULL")) return bad;
    return guarded([&] {
        CriticScore score{correctness, severity, profitability, 0};
        *final_score = gptlens_rank(score, RankWeights{wc, ws, wp});
    });
}

solaudit_status solaudit_ctx_open(const char* config_path_or_null, solaudit_ctx** out) {
    if (auto bad = require(out != nullptr, "out must be non-NULL")) return bad;
    return guarded([&] {
        RunConfig config = config_path_or_null ? load_run_config(config_path_or_null)
                                               : default_run_config();
        *out = new solaudit_ctx{std::move(config)};
    });
}

solaudit_status solaudit_ctx_set(solaudit_ctx* ctx, const char* key, const char* value) {
    if (auto bad = require(ctx && key && value, "ctx, key and value must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        RunConfig& c = ctx->config;
        std::string k = key;
        std::string v = value;
        auto as_u64 = [&] { return static_cast<uint64_t>(std::stoull(v)); };
        auto as_int = [&] { return std::stoi(v); };
        auto as_bool = [&] { return v == "1" || v == "true" || v == "yes"; };

        if (k == "seed") c.seed = as_u64();
        else if (k == "offline") c.offline = as_bool();
        else if (k == "strict") c.strict = as_bool();
        else if (k == "threshold") c.threshold = (threshold_preset(v), v);
        else if (k == "rendering") {
            if (v != "chat" && v != "alpaca") {
                raise(Errc::invalid_argument, "rendering must be 'chat' or 'alpaca'");
            }
            c.rendering = v;
        } else if (k == "parallelism") c.parallelism = as_int();
        else if (k == "top_k") c.top_k = as_int();
        else if (k == "out_dir") c.out_dir = v;
        else if (k == "bpe_data_dir") c.bpe_data_dir = v;
        else if (k == "taxonomy") c.taxonomy_path = v;
        else if (k == "synonyms") c.synonyms_path = v;
        else if (k == "support_mode") {
            if (v != "gold" && v != "tp") {
                raise(Errc::invalid_argument, "support_mode must be 'gold' or 'tp'");
            }
            c.support_mode = v;
        } else if (k == "corpus.max_tokens") c.corpus.max_tokens = as_u64();
        else if (k == "corpus.explorer_base_url") c.corpus.explorer_base_url = v;
        else if (k == "corpus.api_key_env_var") c.corpus.api_key_env_var = v;
        else if (k == "corpus.backoff_base_ms") c.corpus.backoff_base_ms = as_int();
        else if (k == "corpus.max_attempts") c.corpus.max_attempts = as_int();
        else if (k == "corpus.requests_per_second") c.corpus.requests_per_second = std::stod(v);
        else if (k == "corpus.parallelism") c.corpus.parallelism = as_int();
        else if (k.rfind("endpoint.", 0) == 0) {
            size_t dot = k.rfind('.');
            if (dot == 8) {
                raise(Errc::invalid_argument, "endpoint key needs endpoint.<model>.<field>");
            }
            std::string model = k.substr(9, dot - 9);
            std::string field = k.substr(dot + 1);
            EndpointConfig& e = c.endpoints[model];
            if (field == "base_url") e.base_url = v;
            else if (field == "api_key_env_var") e.api_key_env_var = v;
            else if (field == "backoff_base_ms") e.backoff_base_ms = as_int();
            else if (field == "max_attempts") e.max_attempts = as_int();
            else if (field == "requests_per_second") e.requests_per_second = std::stod(v);
            else raise(Errc::invalid_argument, "unknown endpoint field: " + field);
        } else {
            raise(Errc::invalid_argument, "unknown config key: " + k);
        }
    });
}

void solaudit_ctx_close(solaudit_ctx* ctx) { delete ctx; }

solaudit_status solaudit_ingest(solaudit_ctx* ctx, const char* addresses_file,
                                const char* corpus_out_path, char** summary_json) {
    if (auto bad = require(ctx && addresses_file && corpus_out_path,
                           "ctx, addresses_file and corpus_out_path must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        IngestStats stats = run_ingest(ctx->config, addresses_file, corpus_out_path);
        nlohmann::ordered_json j;
        j["requested"] = stats.requested;
        j["fetched"] = stats.fetched;
        j["unverified"] = stats.unverified;
        j["kept"] = stats.kept;
        j["excluded"] = stats.excluded;
        j["warnings"] = stats.warnings;
        set_out(summary_json, j.dump());
    });
}

solaudit_status solaudit_label(solaudit_ctx* ctx, const char* corpus_path,
                               const char* reports_dir, const char* labeled_out_path,
                               char** summary_json) {
    if (auto bad = require(ctx && corpus_path && reports_dir && labeled_out_path,
                           "ctx, corpus_path, reports_dir and labeled_out_path must be "
                           "non-NULL")) {
        return bad;
    }
    return guarded([&] {
        LabelStats stats = run_label(ctx->config, corpus_path, reports_dir, labeled_out_path);
        nlohmann::ordered_json j;
        j["total"] = stats.summary.total;
        j["vulnerable"] = stats.summary.vulnerable;
        j["clean"] = stats.summary.clean;
        nlohmann::ordered_json per_class;
        for (VulnClass c : kAllClasses) {
            per_class[std::string(class_abbrev(c))] =
                stats.summary.per_class[static_cast<size_t>(c)];
        }
        j["per_class"] = per_class;
        j["unmapped_detector_ids"] = stats.unmapped_ids;
        set_out(summary_json, j.dump());
    });
}

solaudit_status solaudit_export_dataset(solaudit_ctx* ctx, const char* corpus_path,
                                        const char* styles, uint64_t cap,
                                        const char* dataset_out_path, char** manifest_json) {
    if (auto bad = require(ctx && corpus_path && styles && dataset_out_path,
                           "ctx, corpus_path, styles and dataset_out_path must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        DatasetManifest m = run_export_dataset(ctx->config, corpus_path, styles,
                                               dataset_out_path, cap);
        nlohmann::ordered_json j;
        j["total_records"] = m.total_records;
        j["detection_count"] = m.detection_count;
        j["generation_count"] = m.generation_count;
        j["token_total"] = m.token_total;
        j["rendering"] = m.rendering == Rendering::AlpacaInstruct ? "alpaca" : "chat";
        set_out(manifest_json, j.dump());
    });
}

solaudit_status solaudit_finetune(solaudit_ctx* ctx, const char* training_file,
                                  const char* base_model, int epochs, int wait,
                                  char** job_json) {
    if (auto bad = require(ctx && training_file && base_model,
                           "ctx, training_file and base_model must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        FinetuneJob job =
            run_finetune(ctx->config, training_file, base_model, epochs, wait != 0, 500);
        const char* status = job.status == JobStatus::Succeeded  ? "succeeded"
                             : job.status == JobStatus::Failed   ? "failed"
                             : job.status == JobStatus::Running  ? "running"
                                                                 : "pending";
        nlohmann::ordered_json j;
        j["job_id"] = job.job_id;
        j["training_file_id"] = job.training_file_id;
        j["status"] = status;
        j["result_model"] = job.result_model ? nlohmann::ordered_json(*job.result_model)
                                             : nlohmann::ordered_json(nullptr);
        set_out(job_json, j.dump());
    });
}

namespace {

void detect_summary(char** summary_json, const DetectStats& stats) {
    nlohmann::ordered_json j;
    j["run_dir"] = stats.run_dir;
    j["contracts"] = stats.contracts;
    j["warnings"] = stats.warnings;
    set_out(summary_json, j.dump());
}

}  // namespace

solaudit_status solaudit_detect(solaudit_ctx* ctx, const char* strategy, const char* model,
                                const char* corpus_path, const char* run_id,
                                char** summary_json) {
    if (auto bad = require(ctx && strategy && model && corpus_path,
                           "ctx, strategy, model and corpus_path must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        DetectStats stats = run_detect(ctx->config, strategy, model, corpus_path,
                                       run_id ? run_id : "");
        detect_summary(summary_json, stats);
    });
}

solaudit_status solaudit_critic(solaudit_ctx* ctx, const char* model,
                                const char* prior_run_dir, const char* run_id,
                                char** summary_json) {
    if (auto bad = require(ctx && model && prior_run_dir,
                           "ctx, model and prior_run_dir must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        DetectStats stats =
            run_critic(ctx->config, model, prior_run_dir, run_id ? run_id : "");
        detect_summary(summary_json, stats);
    });
}

solaudit_status solaudit_replay(solaudit_ctx* ctx, const char* prior_run_dir,
                                const char* run_id, char** summary_json) {
    if (auto bad = require(ctx && prior_run_dir, "ctx and prior_run_dir must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        DetectStats stats = run_replay(ctx->config, prior_run_dir, run_id ? run_id : "");
        detect_summary(summary_json, stats);
    });
}

solaudit_status solaudit_score(solaudit_ctx* ctx, const char* predictions_path,
                               const char* gold_corpus_path, const char* report_out_dir,
                               char** report_json) {
    if (auto bad = require(ctx && predictions_path && gold_corpus_path && report_out_dir,
                           "ctx, predictions_path, gold_corpus_path and report_out_dir must "
                           "be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        MetricsReport report =
            run_score(ctx->config, predictions_path, gold_corpus_path, report_out_dir);
        set_out(report_json, report_jsonl({report}));
    });
}

solaudit_status solaudit_report(solaudit_ctx* ctx, const char* report_paths,
                                const char* format, char** out_text) {
    if (auto bad = require(ctx && report_paths && format && out_text,
                           "ctx, report_paths, format and out_text must be non-NULL")) {
        return bad;
    }
    return guarded([&] {
        std::vector<std::string> paths;
        for (const std::string& p : split(report_paths, ';')) {
            if (!trim(p).empty()) paths.push_back(trim(p));
        }
        set_out(out_text, run_report(paths, format));
    });
}

}  // extern "C"
