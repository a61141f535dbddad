#include "core/corpus.hpp"

#include <fstream>
#include <map>

#include "json.hpp"

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

BudgetSplit filter_by_budget(std::vector<ContractRecord> records, const CorpusConfig& config) {
    BudgetSplit out;
    for (ContractRecord& r : records) {
        if (r.token_count > config.max_tokens) {
            out.excluded.push_back(std::move(r));
        } else {
            out.kept.push_back(std::move(r));
        }
    }
    return out;
}

void save_corpus(const std::string& path, const std::vector<ContractRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io, "cannot open for writing: " + path);
    }
    for (const ContractRecord& r : records) {
        nlohmann::ordered_json j;
        j["address"] = r.address;
        j["cleaned_source"] = r.cleaned_source;
        j["token_count"] = r.token_count;
        j["solc_version"] = r.solc_version;
        if (r.gold_labels) {
            j["labels"] = r.gold_labels->abbrevs();
        }
        out << j.dump() << '\n';
    }
    if (!out) {
        raise(Errc::io, "short write: " + path);
    }
}

std::vector<ContractRecord> load_corpus(const std::string& path) {
    std::vector<ContractRecord> records;
    std::string text = read_file(path);
    int line_no = 0;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::parse, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ContractRecord r;
        try {
            r.address = j.at("address").get<std::string>();
            r.cleaned_source = j.at("cleaned_source").get<std::string>();
            r.token_count = j.at("token_count").get<uint64_t>();
            r.solc_version = j.value("solc_version", std::string{});
            if (j.contains("labels")) {
                LabelSet labels;
                for (const auto& item : j["labels"]) {
                    auto c = class_from_abbrev(item.get<std::string>());
                    if (!c) {
                        raise(Errc::parse, path + ":" + std::to_string(line_no) +
                                               ": unknown class " + item.get<std::string>());
                    }
                    labels.add(*c);
                }
                r.gold_labels = labels;
            }
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::parse, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!is_contract_address(r.address)) {
            raise(Errc::parse,
                  path + ":" + std::to_string(line_no) + ": bad address " + r.address);
        }
        records.push_back(std::move(r));
    }
    return records;
}

LabelSummary label_corpus(std::vector<ContractRecord>& records,
                          const std::vector<ToolFinding>& findings, const VotePolicy& policy) {
    std::map<std::string, std::vector<ToolFinding>> by_address;
    for (const ToolFinding& f : findings) {
        by_address[f.address].push_back(f);
    }

    LabelSummary summary;
    summary.total = records.size();
    for (ContractRecord& r : records) {
        auto it = by_address.find(r.address);
        LabelSet labels;
        if (it != by_address.end()) {
            labels = majority_vote(it->second, policy, r.address);
        }
        r.gold_labels = labels;
        if (labels.empty()) {
            ++summary.clean;
        } else {
            ++summary.vulnerable;
        }
        for (VulnClass c : labels.classes()) {
            ++summary.per_class[static_cast<size_t>(c)];
        }
    }
    return summary;
}

}  // namespace solaudit
