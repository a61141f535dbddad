#pragma once

#include <map>
#include <string>

#include "core/corpus.hpp"
#include "core/detectors.hpp"
#include "core/gateway.hpp"
#include "core/prompts.hpp"
#include "core/taxonomy.hpp"

namespace solaudit {

struct RunConfig {
    std::map<std::string, EndpointConfig> endpoints;  // model name -> endpoint; "default" key
    CorpusConfig corpus;

    std::string bpe_data_dir;    // vocab.json + merges.txt
    std::string taxonomy_path;   // optional; defaults embedded
    std::string synonyms_path;   // optional; defaults embedded

    std::string threshold = "gt1c";
    std::string rendering = "chat";  // "chat" | "alpaca"
    uint64_t seed = 0;
    int parallelism = 4;
    bool offline = false;
    bool strict = false;
    int top_k = 3;
    RankWeights rank_weights;
    std::string support_mode = "gold";  // "gold" | "tp"
    std::string out_dir = "out";

    const EndpointConfig& endpoint_for(const std::string& model) const;
};

// Loads the single JSON config file. ${VAR} in string values interpolates
// from the environment (so secrets stay out of config snapshots); files the
// config references must exist.
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

// Config snapshot for run manifests: same shape as the file, never
// interpolated, so key material cannot leak into artifacts.
std::string config_snapshot(const RunConfig& config);

struct TaxonomyBundle {
    SwcMapping swc = SwcMapping::defaults();
    DetectorTable detectors = DetectorTable::defaults();
    VotePolicy policy = VotePolicy::strict_majority(DetectorTable::defaults());
};

// Optional overrides from one taxonomy config file (swc ids/names, per-tool
// detector tables, supporting tools, quorum rule).
TaxonomyBundle load_taxonomy(const std::string& path_or_empty);

SynonymTable load_synonyms(const std::string& path_or_empty);

}  // namespace solaudit
