/* solaudit — smart-contract vulnerability detection pipeline.
 *
 * C API over the C++ core. Every function returns a solaudit_status; on
 * failure solaudit_last_error() describes the problem for the calling
 * thread. Strings returned through char** are heap-allocated and must be
 * released with solaudit_string_free(). Handles are opaque and must be
 * closed with their matching _close/_free function.
 */
#ifndef SOLAUDIT_H
#define SOLAUDIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum solaudit_status {
    SOLAUDIT_OK = 0,
    SOLAUDIT_ERR_INVALID_ARGUMENT = 1,
    SOLAUDIT_ERR_IO = 2,
    SOLAUDIT_ERR_PARSE = 3,
    SOLAUDIT_ERR_UNTERMINATED_COMMENT = 4,
    SOLAUDIT_ERR_UNTERMINATED_STRING = 5,
    SOLAUDIT_ERR_UNVERIFIED = 6,
    SOLAUDIT_ERR_RATE_LIMITED = 7,
    SOLAUDIT_ERR_TRANSPORT = 8,
    SOLAUDIT_ERR_BAD_REQUEST = 9,
    SOLAUDIT_ERR_SCHEMA_VIOLATION = 10,
    SOLAUDIT_ERR_CACHE_MISS = 11,
    SOLAUDIT_ERR_UNPARSEABLE_RESPONSE = 12,
    SOLAUDIT_ERR_CONFIG = 13,
    SOLAUDIT_ERR_UNKNOWN_DETECTOR_ID = 14,
    SOLAUDIT_ERR_MALFORMED_REPORT = 15,
    SOLAUDIT_ERR_MISSING_GOLD = 16,
    SOLAUDIT_ERR_DUPLICATE_PREDICTION = 17,
    SOLAUDIT_ERR_NO_SUPPORT = 18,
    SOLAUDIT_ERR_UPLOAD_REJECTED = 19,
    SOLAUDIT_ERR_JOB_FAILED = 20,
    SOLAUDIT_ERR_INCONSISTENT_CRITIC = 21,
    SOLAUDIT_ERR_INTERNAL = 22
} solaudit_status;

const char* solaudit_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* solaudit_last_error(void);

void solaudit_string_free(char* s);

/* ---- Source cleaning ---------------------------------------------------- */

/* Removes Solidity line/block comments. String literals are untouched; a
 * line holding only comments disappears. On lexical errors the 1-based line
 * number lands in *error_line (when non-NULL). */
solaudit_status solaudit_strip_comments(const char* source, char** out, int* error_line);

/* Collapses blank-line runs, strips trailing whitespace, ends the text with
 * exactly one newline (empty input stays empty). */
solaudit_status solaudit_collapse_blank_lines(const char* source, char** out);

/* ---- Tokenizer ----------------------------------------------------------- */

typedef struct solaudit_tokenizer solaudit_tokenizer;

/* data_dir must hold vocab.json and merges.txt (GPT-2 file format); a
 * SHA256SUMS file next to them is verified when present. */
solaudit_status solaudit_tokenizer_open(const char* data_dir, solaudit_tokenizer** out);
solaudit_status solaudit_tokenizer_count(const solaudit_tokenizer* tok, const char* text,
                                         uint64_t* count);
void solaudit_tokenizer_close(solaudit_tokenizer* tok);

/* ---- Detection-output parsing ------------------------------------------- */

/* Parses a detection reply into a comma-separated list of class
 * abbreviations (possibly empty). *vacuous is set to 1 when a vulnerable
 * header carried no recognizable class. */
solaudit_status solaudit_parse_detection_output(const char* text, char** labels_csv,
                                                int* vacuous);

/* ---- GPTLens ranking ----------------------------------------------------- */

/* final = wc*correctness + ws*severity + wp*profitability; weights must be
 * non-negative and sum to 1. */
solaudit_status solaudit_gptlens_rank(double correctness, double severity, double profitability,
                                      double wc, double ws, double wp, double* final_score);

/* ---- Pipeline context ----------------------------------------------------
 *
 * A context wraps the run configuration. Open it from a config file (NULL
 * for built-in defaults), then override individual keys with
 * solaudit_ctx_set. Keys mirror the config file: "seed", "offline",
 * "strict", "threshold", "rendering", "parallelism", "top_k", "out_dir",
 * "bpe_data_dir", "taxonomy", "synonyms", "support_mode",
 * "corpus.max_tokens", "corpus.explorer_base_url", "corpus.api_key_env_var",
 * "corpus.backoff_base_ms", "corpus.max_attempts", "corpus.requests_per_second",
 * "endpoint.<model>.base_url", "endpoint.<model>.api_key_env_var",
 * "endpoint.<model>.backoff_base_ms", "endpoint.<model>.max_attempts".
 */

typedef struct solaudit_ctx solaudit_ctx;

solaudit_status solaudit_ctx_open(const char* config_path_or_null, solaudit_ctx** out);
solaudit_status solaudit_ctx_set(solaudit_ctx* ctx, const char* key, const char* value);
void solaudit_ctx_close(solaudit_ctx* ctx);

/* ---- Pipeline stages ------------------------------------------------------
 *
 * Each stage returns a JSON summary through *summary_json (optional; pass
 * NULL to skip). Artifacts land under the context's out_dir.
 */

/* Fetch + clean + count + budget-filter the addresses (one 0x... per line). */
solaudit_status solaudit_ingest(solaudit_ctx* ctx, const char* addresses_file,
                                const char* corpus_out_path, char** summary_json);

/* Majority-vote labeling from per-tool reports <reports_dir>/<tool>.jsonl. */
solaudit_status solaudit_label(solaudit_ctx* ctx, const char* corpus_path,
                               const char* reports_dir, const char* labeled_out_path,
                               char** summary_json);

/* Render a fine-tuning dataset. styles: "detection" or "detection,generation";
 * cap = 0 means no cap; the context seed drives the capped sampling. */
solaudit_status solaudit_export_dataset(solaudit_ctx* ctx, const char* corpus_path,
                                        const char* styles, uint64_t cap,
                                        const char* dataset_out_path, char** manifest_json);

/* Upload a chat-format training file and create a fine-tune job; optionally
 * poll until it settles. */
solaudit_status solaudit_finetune(solaudit_ctx* ctx, const char* training_file,
                                  const char* base_model, int epochs, int wait,
                                  char** job_json);

/* Run one detection strategy ("finetuned", "zeroshot", "zeroshot-critic",
 * "gptlens", "random") over a corpus. run_id may be NULL for a derived id. */
solaudit_status solaudit_detect(solaudit_ctx* ctx, const char* strategy, const char* model,
                                const char* corpus_path, const char* run_id,
                                char** summary_json);

/* Critic post-pass over a prior run's findings.jsonl. */
solaudit_status solaudit_critic(solaudit_ctx* ctx, const char* model,
                                const char* prior_run_dir, const char* run_id,
                                char** summary_json);

/* Re-run a prior detection purely from its response cache (offline). */
solaudit_status solaudit_replay(solaudit_ctx* ctx, const char* prior_run_dir,
                                const char* run_id, char** summary_json);

/* Score predictions against gold labels; writes report.{txt,csv,jsonl}. */
solaudit_status solaudit_score(solaudit_ctx* ctx, const char* predictions_path,
                               const char* gold_corpus_path, const char* report_out_dir,
                               char** report_json);

/* Merge report.jsonl files (semicolon-separated paths) into "table", "csv"
 * or "jsonl" form. */
solaudit_status solaudit_report(solaudit_ctx* ctx, const char* report_paths,
                                const char* format, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* SOLAUDIT_H */
