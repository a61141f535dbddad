#include "core/metrics.hpp"

#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

std::map<std::string, LabelSet> gold_index(const std::vector<ContractRecord>& gold) {
    std::map<std::string, LabelSet> index;
    for (const ContractRecord& r : gold) {
        if (!r.gold_labels) {
            raise(Errc::missing_gold, "record " + r.address + " is not labeled");
        }
        index[r.address] = *r.gold_labels;
    }
    return index;
}

}  // namespace

ConfusionCounts confusion(const std::vector<Prediction>& predictions,
                          const std::vector<ContractRecord>& gold) {
    auto index = gold_index(gold);
    std::set<std::string> seen;

    ConfusionCounts counts;
    counts.n_contracts = predictions.size();
    for (const Prediction& p : predictions) {
        if (!seen.insert(p.address).second) {
            raise(Errc::duplicate_prediction, "duplicate prediction for " + p.address);
        }
        auto it = index.find(p.address);
        if (it == index.end()) {
            raise(Errc::missing_gold, "no gold record for " + p.address);
        }
        const LabelSet& truth = it->second;
        for (VulnClass c : kAllClasses) {
            bool predicted = p.labels.contains(c);
            bool actual = truth.contains(c);
            CellCounts& cell = counts.cell(c);
            if (predicted && actual) ++cell.tp;
            else if (predicted && !actual) ++cell.fp;
            else if (!predicted && actual) ++cell.fn;
            else ++cell.tn;
        }
    }
    return counts;
}

ClassMetrics class_metrics(const CellCounts& cell) {
    ClassMetrics m;
    uint64_t total = cell.total();
    m.precision = (cell.tp + cell.fp) ? static_cast<double>(cell.tp) / (cell.tp + cell.fp) : 0.0;
    m.recall = (cell.tp + cell.fn) ? static_cast<double>(cell.tp) / (cell.tp + cell.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    m.accuracy = total ? static_cast<double>(cell.tp + cell.tn) / total : 0.0;
    return m;
}

double weighted_f1(const std::array<double, kNumClasses>& f1_by_class,
                   const std::array<uint64_t, kNumClasses>& supports) {
    uint64_t total_support = 0;
    double weighted_sum = 0;
    for (int i = 0; i < kNumClasses; ++i) {
        total_support += supports[i];
        weighted_sum += static_cast<double>(supports[i]) * f1_by_class[i];
    }
    if (total_support == 0) {
        raise(Errc::no_support, "every class has zero support");
    }
    return weighted_sum / static_cast<double>(total_support);
}

BinaryMetrics binary_metrics(const std::vector<Prediction>& predictions,
                             const std::vector<ContractRecord>& gold) {
    auto index = gold_index(gold);
    std::set<std::string> seen;
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const Prediction& p : predictions) {
        if (!seen.insert(p.address).second) {
            raise(Errc::duplicate_prediction, "duplicate prediction for " + p.address);
        }
        auto it = index.find(p.address);
        if (it == index.end()) {
            raise(Errc::missing_gold, "no gold record for " + p.address);
        }
        bool predicted = !p.labels.empty();
        bool actual = !it->second.empty();
        if (predicted && actual) ++tp;
        else if (predicted && !actual) ++fp;
        else if (!predicted && actual) ++fn;
        else ++tn;
    }

    BinaryMetrics m;
    m.precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    m.specificity = (tn + fp) ? static_cast<double>(tn) / (tn + fp) : 0.0;
    uint64_t total = tp + fp + fn + tn;
    m.accuracy = total ? static_cast<double>(tp + tn) / total : 0.0;
    return m;
}

MetricsReport score_run(const std::vector<Prediction>& predictions,
                        const std::vector<ContractRecord>& gold, SupportMode support_mode) {
    MetricsReport report;
    if (!predictions.empty()) {
        report.strategy = std::string(strategy_name(predictions.front().strategy));
        report.model = predictions.front().model;
    }
    report.n_contracts = predictions.size();

    ConfusionCounts counts = confusion(predictions, gold);
    std::array<double, kNumClasses> f1s{};
    for (int i = 0; i < kNumClasses; ++i) {
        const CellCounts& cell = counts.per_class[i];
        report.per_class[i] = class_metrics(cell);
        f1s[i] = report.per_class[i].f1;
        report.supports[i] =
            support_mode == SupportMode::GoldPositives ? cell.tp + cell.fn : cell.tp;
    }
    report.weighted_f1 = weighted_f1(f1s, report.supports);
    report.binary = binary_metrics(predictions, gold);
    return report;
}

namespace {

std::string run_label(const MetricsReport& r) {
    if (r.model.empty()) return r.strategy;
    if (r.strategy.empty() || r.model == r.strategy) return r.model;
    return r.strategy + ":" + r.model;
}

}  // namespace

std::string report_table(const std::vector<MetricsReport>& reports) {
    std::vector<std::string> headers = {"Model", "Weighted F1"};
    for (VulnClass c : kAllClasses) {
        headers.push_back(std::string(class_abbrev(c)) + " F1");
    }

    std::vector<std::vector<std::string>> rows;
    for (const MetricsReport& r : reports) {
        std::vector<std::string> row = {run_label(r), format_metric(r.weighted_f1)};
        for (VulnClass c : kAllClasses) {
            row.push_back(format_metric(r.per_class[static_cast<size_t>(c)].f1));
        }
        rows.push_back(std::move(row));
    }

    std::vector<size_t> widths(headers.size());
    for (size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << (i ? "  " : "") << row[i]
                << std::string(widths[i] - row[i].size(), ' ');
        }
        out << '\n';
    };
    emit_row(headers);
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

std::string report_csv(const std::vector<MetricsReport>& reports) {
    std::ostringstream out;
    out << "model,weighted_f1";
    for (VulnClass c : kAllClasses) {
        out << ',' << to_lower(class_abbrev(c)) << "_f1";
    }
    out << ",binary_precision,binary_recall,binary_f1,binary_specificity,binary_accuracy\n";
    for (const MetricsReport& r : reports) {
        out << run_label(r) << ',' << format_metric(r.weighted_f1);
        for (VulnClass c : kAllClasses) {
            out << ',' << format_metric(r.per_class[static_cast<size_t>(c)].f1);
        }
        out << ',' << format_metric(r.binary.precision) << ',' << format_metric(r.binary.recall)
            << ',' << format_metric(r.binary.f1) << ',' << format_metric(r.binary.specificity)
            << ',' << format_metric(r.binary.accuracy) << '\n';
    }
    return out.str();
}

std::string report_jsonl(const std::vector<MetricsReport>& reports) {
    std::string out;
    for (const MetricsReport& r : reports) {
        nlohmann::ordered_json j;
        j["strategy"] = r.strategy;
        j["model"] = r.model;
        j["n_contracts"] = r.n_contracts;
        j["weighted_f1"] = r.weighted_f1;
        nlohmann::ordered_json per_class;
        for (VulnClass c : kAllClasses) {
            const ClassMetrics& m = r.per_class[static_cast<size_t>(c)];
            per_class[std::string(class_abbrev(c))] = {{"precision", m.precision},
                                                       {"recall", m.recall},
                                                       {"f1", m.f1},
                                                       {"accuracy", m.accuracy},
                                                       {"support", r.supports[static_cast<size_t>(c)]}};
        }
        j["per_class"] = per_class;
        j["binary"] = {{"precision", r.binary.precision},
                       {"recall", r.binary.recall},
                       {"f1", r.binary.f1},
                       {"specificity", r.binary.specificity},
                       {"accuracy", r.binary.accuracy}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<MetricsReport> parse_reports_jsonl(const std::string& text) {
    std::vector<MetricsReport> reports;
    int line_no = 0;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::parse, "report line " + std::to_string(line_no) + ": " + e.what());
        }
        MetricsReport r;
        r.strategy = j.value("strategy", std::string{});
        r.model = j.value("model", std::string{});
        r.n_contracts = j.value("n_contracts", size_t{0});
        r.weighted_f1 = j.value("weighted_f1", 0.0);
        for (VulnClass c : kAllClasses) {
            std::string key(class_abbrev(c));
            if (!j.contains("per_class") || !j["per_class"].contains(key)) continue;
            const nlohmann::json& m = j["per_class"][key];
            ClassMetrics& cm = r.per_class[static_cast<size_t>(c)];
            cm.precision = m.value("precision", 0.0);
            cm.recall = m.value("recall", 0.0);
            cm.f1 = m.value("f1", 0.0);
            cm.accuracy = m.value("accuracy", 0.0);
            r.supports[static_cast<size_t>(c)] = m.value("support", uint64_t{0});
        }
        if (j.contains("binary")) {
            const nlohmann::json& b = j["binary"];
            r.binary.precision = b.value("precision", 0.0);
            r.binary.recall = b.value("recall", 0.0);
            r.binary.f1 = b.value("f1", 0.0);
            r.binary.specificity = b.value("specificity", 0.0);
            r.binary.accuracy = b.value("accuracy", 0.0);
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace solaudit
