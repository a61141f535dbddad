#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/detectors.hpp"
#include "core/taxonomy.hpp"

namespace solaudit {

struct CellCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t tn = 0;
    uint64_t total() const { return tp + fp + fn + tn; }
};

struct ConfusionCounts {
    std::array<CellCounts, kNumClasses> per_class{};
    size_t n_contracts = 0;

    const CellCounts& cell(VulnClass c) const { return per_class[static_cast<size_t>(c)]; }
    CellCounts& cell(VulnClass c) { return per_class[static_cast<size_t>(c)]; }
};

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0;
};

struct BinaryMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double specificity = 0;
    double accuracy = 0;
};

enum class SupportMode { GoldPositives, TruePositives };

struct MetricsReport {
    std::string strategy;
    std::string model;
    size_t n_contracts = 0;
    std::array<ClassMetrics, kNumClasses> per_class{};
    std::array<uint64_t, kNumClasses> supports{};
    double weighted_f1 = 0;
    BinaryMetrics binary;
};

// Per-class confusion cells over one prediction per contract. Throws
// Error{MissingGold} for a prediction without a gold record and
// Error{DuplicatePrediction} for a repeated address.
ConfusionCounts confusion(const std::vector<Prediction>& predictions,
                          const std::vector<ContractRecord>& gold);

// Zero-denominator cases report 0 by convention.
ClassMetrics class_metrics(const CellCounts& cell);

// Support-weighted mean of per-class F1. Throws Error{NoSupport} when every
// support is zero.
double weighted_f1(const std::array<double, kNumClasses>& f1_by_class,
                   const std::array<uint64_t, kNumClasses>& supports);

// Contract-level: predicted-positive iff the predicted set is non-empty,
// gold-positive iff the gold set is non-empty.
BinaryMetrics binary_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<ContractRecord>& gold);

// Full report for one (strategy, model) run. Support defaults to the
// gold-positive count per class; SupportMode::TruePositives weights by tp
// cells instead.
MetricsReport score_run(const std::vector<Prediction>& predictions,
                        const std::vector<ContractRecord>& gold,
                        SupportMode support_mode = SupportMode::GoldPositives);

// Rows = runs; columns = weighted F1 then per-class F1 in canonical order.
// Values display with 3 decimals (half-up); the structured format keeps full
// precision.
std::string report_table(const std::vector<MetricsReport>& reports);
std::string report_csv(const std::vector<MetricsReport>& reports);
std::string report_jsonl(const std::vector<MetricsReport>& reports);

// Inverse of report_jsonl, for merging saved reports into comparison tables.
std::vector<MetricsReport> parse_reports_jsonl(const std::string& text);

}  // namespace solaudit
