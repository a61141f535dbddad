#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/taxonomy.hpp"

namespace solaudit {

struct ContractRecord {
    std::string address;         // 0x + 40 hex chars
    std::string raw_source;      // not persisted
    std::string cleaned_source;
    uint64_t token_count = 0;
    std::string solc_version;
    std::optional<LabelSet> gold_labels;
};

struct CorpusConfig {
    uint64_t max_tokens = 7340;
    std::string explorer_base_url;
    std::string api_key_env_var = "ETHERSCAN_API_KEY";

    int max_attempts = 5;
    int backoff_base_ms = 1000;
    double backoff_factor = 2.0;
    int parallelism = 4;
    double requests_per_second = 4.0;
};

struct BudgetSplit {
    std::vector<ContractRecord> kept;
    std::vector<ContractRecord> excluded;
};

// Partitions records by the token budget: token_count > max_tokens is
// excluded, the boundary value itself is kept. Order is preserved on both
// sides.
BudgetSplit filter_by_budget(std::vector<ContractRecord> records, const CorpusConfig& config);

// Line-delimited UTF-8 persistence; one record per line with fields
// (address, cleaned_source, token_count, solc_version, labels). The labels
// field is absent until the record has been labeled.
void save_corpus(const std::string& path, const std::vector<ContractRecord>& records);
std::vector<ContractRecord> load_corpus(const std::string& path);

// Applies the vote policy to every record. Tools that did not report on an
// address simply contribute no vote.
LabelSummary label_corpus(std::vector<ContractRecord>& records,
                          const std::vector<ToolFinding>& findings, const VotePolicy& policy);

}  // namespace solaudit
