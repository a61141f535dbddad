#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace solaudit {

// Stage drivers behind the CLI subcommands. Every run writes its artifacts
// under config.out_dir and a manifest recording the config snapshot, seed,
// and content hashes of its inputs; manifests carry no timestamps so reruns
// stay byte-identical.

struct IngestStats {
    size_t requested = 0;
    size_t fetched = 0;
    size_t unverified = 0;
    size_t kept = 0;
    size_t excluded = 0;
    std::vector<std::string> warnings;
};
IngestStats run_ingest(const RunConfig& config, const std::string& addresses_file,
                       const std::string& out_path);

struct LabelStats {
    LabelSummary summary;
    std::vector<std::string> unmapped_ids;
};
LabelStats run_label(const RunConfig& config, const std::string& corpus_path,
                     const std::string& reports_dir, const std::string& out_path);

// Renders and writes a fine-tuning dataset plus its manifest JSON next to it.
DatasetManifest run_export_dataset(const RunConfig& config, const std::string& corpus_path,
                                   const std::string& styles, const std::string& out_path,
                                   size_t cap);

FinetuneJob run_finetune(const RunConfig& config, const std::string& training_file,
                         const std::string& base_model, int epochs, bool wait,
                         int poll_interval_ms);

struct DetectStats {
    std::string run_dir;
    size_t contracts = 0;
    size_t warnings = 0;
};
// Runs one strategy over the corpus; writes predictions.jsonl, findings.jsonl
// (when the strategy produces findings), cache.jsonl, and manifest.json under
// <out_dir>/runs/<run_id>/.
DetectStats run_detect(const RunConfig& config, const std::string& strategy,
                       const std::string& model, const std::string& corpus_path,
                       const std::string& run_id);

// Critic post-pass over a prior run's findings file.
DetectStats run_critic(const RunConfig& config, const std::string& model,
                       const std::string& prior_run_dir, const std::string& run_id);

// Re-executes a prior run purely from its cache (offline) into a new run dir.
DetectStats run_replay(const RunConfig& config, const std::string& prior_run_dir,
                       const std::string& run_id);

// Scores predictions against gold labels; writes report.txt/.csv/.jsonl under
// out_dir and returns the report.
MetricsReport run_score(const RunConfig& config, const std::string& predictions_path,
                        const std::string& gold_path, const std::string& out_dir);

// Merges one or more report.jsonl files into the requested format
// ("table", "csv", "jsonl").
std::string run_report(const std::vector<std::string>& report_paths, const std::string& format);

}  // namespace solaudit
