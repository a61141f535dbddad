#include "core/prompts.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "core/error.hpp"
#include "core/rng.hpp"

namespace solaudit {

namespace {

void require_labels(const ContractRecord& record) {
    if (!record.gold_labels) {
        raise(Errc::invalid_argument,
              "record " + record.address + " has no gold labels yet");
    }
}

}  // namespace

PromptRecord build_detection_prompt(const ContractRecord& record, const SwcMapping& mapping) {
    require_labels(record);
    PromptRecord p;
    p.style = PromptStyle::Detection;
    p.address = record.address;
    p.instruction = prompt_text::kDetectionInstruction;
    p.input = std::string(prompt_text::kDetectionInputPrefix) + record.cleaned_source;
    if (record.gold_labels->empty()) {
        p.prompt_case = PromptCase::Clean;
        p.output = std::string(prompt_text::kCleanOutputHeader) + "\n" +
                   mapping.vulnerability_block(LabelSet::all());
    } else {
        p.prompt_case = PromptCase::Vulnerable;
        p.output = std::string(prompt_text::kVulnerableOutputHeader) + "\n" +
                   mapping.vulnerability_block(*record.gold_labels);
    }
    return p;
}

PromptRecord build_generation_prompt(const ContractRecord& record, const SwcMapping& mapping) {
    require_labels(record);
    PromptRecord p;
    p.style = PromptStyle::Generation;
    p.address = record.address;
    p.instruction = prompt_text::kGenerationInstruction;
    p.prompt_case = record.gold_labels->empty() ? PromptCase::Clean : PromptCase::Vulnerable;
    const char* header = p.prompt_case == PromptCase::Clean
                             ? prompt_text::kGenerateCleanHeader
                             : prompt_text::kGenerateVulnerableHeader;
    p.input = std::string(header) + "\n" + mapping.vulnerability_block(LabelSet::all());
    p.output = record.cleaned_source;
    return p;
}

std::string render_alpaca(const PromptRecord& p) {
    std::string out =
        "Below is an instruction that describes a task, paired with an input that "
        "provides further context. Write a response that appropriately completes "
        "the request.";
    out += "\n\n### Instruction:\n";
    out += p.instruction;
    out += "\n\n### Input:\n";
    out += p.input;
    out += "\n\n### Response:\n";
    out += p.output;
    return out;
}

std::vector<ChatMessage> render_chat(const PromptRecord& p) {
    return {
        {"system", p.instruction},
        {"user", p.input},
        {"assistant", p.output},
    };
}

std::string chat_line_json(const PromptRecord& p) {
    nlohmann::ordered_json line;
    line["messages"] = nlohmann::ordered_json::array();
    for (const ChatMessage& m : render_chat(p)) {
        line["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    return line.dump();
}

namespace {

std::string alpaca_line_json(const PromptRecord& p) {
    nlohmann::ordered_json line;
    line["instruction"] = p.instruction;
    line["input"] = p.input;
    line["output"] = p.output;
    return line.dump();
}

// Seeded, stratified by vulnerable/clean, stable across runs. Returns
// ascending indices so corpus order survives sampling.
std::vector<size_t> select_records(const std::vector<ContractRecord>& records, size_t cap,
                                   uint64_t seed) {
    if (cap == 0 || cap >= records.size()) {
        std::vector<size_t> all(records.size());
        for (size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    std::vector<size_t> vulnerable;
    std::vector<size_t> clean;
    for (size_t i = 0; i < records.size(); ++i) {
        require_labels(records[i]);
        (records[i].gold_labels->empty() ? clean : vulnerable).push_back(i);
    }
    // Proportional allocation, rounded down, remainder to the larger stratum.
    size_t take_vuln = cap * vulnerable.size() / records.size();
    size_t take_clean = cap - take_vuln;
    if (take_clean > clean.size()) {
        take_vuln += take_clean - clean.size();
        take_clean = clean.size();
    }
    if (take_vuln > vulnerable.size()) {
        take_clean += take_vuln - vulnerable.size();
        take_vuln = vulnerable.size();
    }

    Rng rng(seed);
    std::vector<size_t> chosen;
    for (size_t k : rng.sample_indices(vulnerable.size(), take_vuln)) {
        chosen.push_back(vulnerable[k]);
    }
    for (size_t k : rng.sample_indices(clean.size(), take_clean)) {
        chosen.push_back(clean[k]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace

DatasetManifest export_dataset(const std::vector<ContractRecord>& records,
                               const SwcMapping& mapping, Rendering rendering,
                               const std::string& path, const SubsetSpec& subset,
                               const Gpt2Bpe& tokenizer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io, "cannot open for writing: " + path);
    }

    DatasetManifest manifest;
    manifest.rendering = rendering;
    for (size_t idx : select_records(records, subset.record_cap, subset.seed)) {
        const ContractRecord& record = records[idx];
        std::vector<PromptRecord> prompts;
        prompts.push_back(build_detection_prompt(record, mapping));
        ++manifest.detection_count;
        if (subset.include_generation) {
            prompts.push_back(build_generation_prompt(record, mapping));
            ++manifest.generation_count;
        }
        for (const PromptRecord& p : prompts) {
            std::string line = rendering == Rendering::AlpacaInstruct ? alpaca_line_json(p)
                                                                      : chat_line_json(p);
            // token_total counts the model-visible rendering, not the JSONL
            // wrapper, for the Alpaca style; the chat style is uploaded
            // verbatim so its wire line is what gets counted.
            std::string counted =
                rendering == Rendering::AlpacaInstruct ? render_alpaca(p) : line;
            manifest.token_total += tokenizer.count(counted);
            out << line << '\n';
        }
    }
    manifest.total_records = manifest.detection_count + manifest.generation_count;
    if (!out) {
        raise(Errc::io, "short write: " + path);
    }
    return manifest;
}

}  // namespace solaudit
