#include "core/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

constexpr std::string_view kStrategyNames[] = {"finetuned", "zeroshot", "zeroshot-critic",
                                               "gptlens", "random"};

constexpr const char* kVulnerableHeaderLc = "has 1 or more of the following";
constexpr const char* kVulnerableHeaderWordsLc = "has one or more of the following";
constexpr const char* kCleanHeaderLc = "has none of the following";

const char* kZeroShotSystemPrompt =
    "You are a world renown smart contract auditor. You must analyze Ethereum smart "
    "contracts to detect exploits and develop example code to test the exploit to validate "
    "it. You are able to utilize fuzzing techniques to locate and fix weaknesses in the "
    "contracts, while also understanding the concepts of cryptography, blockchain "
    "technology, and secure coding practices.\n"
    "The specific exploits you MUST search for in each smart contract are;\n"
    "{vulnerabilities}\n"
    "\n"
    "Rules you MUST follow:\n"
    "- Be brief and to the point\n"
    "- Think step by step\n"
    "- Try your best to avoid false positives in exploit identification\n"
    "- Provide the code vulnerable code from the smart contract with line numbers\n"
    "- \"Status\" should be only \"No Exploit\" or \"Exploit Found\"";

const char* kCriticSystemPrompt =
    "The vulnerabilities and listed code combinations are likely to contain mistakes. As a "
    "harsh vulnerability critic, your duty is to scrutinize the exploit listed and "
    "associated code and evaluate the correctness and severity of given vulnerabilities and "
    "associated reasoning and provide a 'confirm' or 'reject' response with detailed "
    "feedback.\n"
    "\n"
    "Rules you MUST follow:\n"
    "- Be brief and to the point\n"
    "- Think step by step\n"
    "- \"Status\" should only be 'No changes recommended' when you have not rejected any "
    "exploits identified and have not put any rejected exploits in exploits_rejected, or "
    "'Changes recommended' if you have rejected any exploits and stored them in "
    "exploits_rejected\n"
    "- \"Exploits\" should contain the confirmed exploits with your feedback\n"
    "- \"Exploits_rejected\" should contain the rejected exploits with the reason for "
    "rejection";

const char* kAuditorSystemPrompt =
    "You are a smart contract auditor reviewing Ethereum smart contracts written in "
    "Solidity. Identify the most critical exploitable vulnerabilities in the contract you "
    "are given.\n"
    "You may only report vulnerabilities from this list;\n"
    "{vulnerabilities}\n"
    "\n"
    "Rules you MUST follow:\n"
    "- Be brief and to the point\n"
    "- Think step by step\n"
    "- Report at most {top_k} vulnerabilities, ordered from most to least severe\n"
    "- Name every vulnerability in the format SWC-ID - Vulnerability name\n"
    "- Provide the vulnerable code from the smart contract with line numbers\n"
    "- Do not report vulnerability types outside the list";

const char* kLensCriticSystemPrompt =
    "You are a harsh vulnerability critic grading exploits reported for Ethereum smart "
    "contracts written in Solidity. For every exploit you are given, grade its correctness, "
    "severity and profitability on a scale of 0-10.\n"
    "\n"
    "Example:\n"
    "exploit : SWC-115 - Authorization through tx.origin\n"
    "code : require(tx.origin == owner);\n"
    "grading : correctness 9, severity 6, profitability 5\n"
    "\n"
    "Rules you MUST follow:\n"
    "- Be brief and to the point\n"
    "- Think step by step\n"
    "- Return one grading per exploit, in the order the exploits were given";

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string exploit_blocks(const std::vector<Finding>& findings) {
    std::string out;
    for (size_t i = 0; i < findings.size(); ++i) {
        out += "======== EXPLOIT " + std::to_string(i + 1) + " ========\n\n";
        out += "exploit : " + findings[i].vuln_text + "\n\n";
        out += "code : " + findings[i].code_excerpt + "\n\n";
    }
    return out;
}

nlohmann::json zero_shot_schema() {
    return nlohmann::json{
        {"type", "object"},
        {"required", {"status", "exploits"}},
        {"properties",
         {{"status", {{"type", "string"}, {"enum", {"No Exploit", "Exploit Found"}}}},
          {"exploits",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"vulnerability"}},
              {"properties",
               {{"vulnerability", {{"type", "string"}}},
                {"code", {{"type", "string"}}},
                {"reasoning", {{"type", "string"}}}}}}}}}}},
    };
}

nlohmann::json critic_schema() {
    nlohmann::json exploit_item = {
        {"type", "object"},
        {"required", {"vulnerability"}},
        {"properties",
         {{"vulnerability", {{"type", "string"}}},
          {"code", {{"type", "string"}}},
          {"feedback", {{"type", "string"}}},
          {"reason", {{"type", "string"}}}}},
    };
    return nlohmann::json{
        {"type", "object"},
        {"required", {"status", "exploits", "exploits_rejected"}},
        {"properties",
         {{"status",
           {{"type", "string"}, {"enum", {"No changes recommended", "Changes recommended"}}}},
          {"exploits", {{"type", "array"}, {"items", exploit_item}}},
          {"exploits_rejected", {{"type", "array"}, {"items", exploit_item}}}}},
    };
}

nlohmann::json scores_schema() {
    return nlohmann::json{
        {"type", "object"},
        {"required", {"scores"}},
        {"properties",
         {{"scores",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"correctness", "severity", "profitability"}},
              {"properties",
               {{"correctness", {{"type", "number"}}},
                {"severity", {{"type", "number"}}},
                {"profitability", {{"type", "number"}}}}}}}}}}},
    };
}

Finding finding_from_json(const nlohmann::json& entry, const SwcMapping& mapping,
                          const SynonymTable& synonyms) {
    Finding f;
    f.vuln_text = entry.value("vulnerability", std::string{});
    f.code_excerpt = entry.value("code", std::string{});
    f.reasoning = entry.contains("reasoning") ? entry.value("reasoning", std::string{})
                                              : entry.value("feedback", std::string{});
    if (f.reasoning.empty()) f.reasoning = entry.value("reason", std::string{});
    f.mapped_class = synonyms.reclassify(f.vuln_text, mapping);
    return f;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
    return kStrategyNames[static_cast<size_t>(s)];
}

std::optional<Strategy> strategy_from_name(std::string_view s) {
    std::string lower = to_lower(s);
    for (size_t i = 0; i < std::size(kStrategyNames); ++i) {
        if (lower == kStrategyNames[i]) return static_cast<Strategy>(i);
    }
    return std::nullopt;
}

ThresholdConfig threshold_preset(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "gte1c") return {"gte1c", true, 1, std::nullopt};
    if (lower == "gt5f-gt5c") return {"gt5f-gt5c", false, 5, 5.0};
    if (lower.size() == 4 && lower.rfind("gt", 0) == 0 && lower[3] == 'c' &&
        lower[2] >= '1' && lower[2] <= '7') {
        return {lower, false, static_cast<double>(lower[2] - '0'), std::nullopt};
    }
    raise(Errc::config, "unknown threshold preset: " + std::string(name));
}

std::vector<std::string> threshold_preset_names() {
    return {"gte1c", "gt1c", "gt2c", "gt3c", "gt4c", "gt5c", "gt5f-gt5c", "gt6c", "gt7c"};
}

SynonymTable SynonymTable::defaults() {
    SynonymTable t;
    auto add_all = [&](VulnClass c, std::initializer_list<const char*> phrases) {
        for (const char* p : phrases) t.add(p, c);
    };
    add_all(VulnClass::ARTHM,
            {"integer overflow", "integer underflow", "arithmetic overflow",
             "arithmetic underflow", "integer arithmetic", "unchecked arithmetic",
             "overflow", "underflow", "multiplication overflow", "wrap around"});
    add_all(VulnClass::RENT, {"reentrancy", "re-entrancy", "reentrant", "re-entrant",
                              "recursive call", "cross-function reentrancy"});
    add_all(VulnClass::DOS, {"denial of service", "denial-of-service", "unbounded loop",
                             "block gas limit", "gas limit reached", "out of gas"});
    add_all(VulnClass::LE, {"locked ether", "locked funds", "frozen ether", "frozen funds",
                            "stuck ether", "trapped ether"});
    add_all(VulnClass::TimeM,
            {"timestamp dependence", "timestamp dependency", "block timestamp",
             "time manipulation", "timestamp manipulation", "block values as a proxy",
             "miner timestamp"});
    add_all(VulnClass::TimeO,
            {"transaction order", "transaction ordering", "transaction-ordering",
             "front running", "front-running", "frontrunning", "race condition"});
    add_all(VulnClass::TxOrigin, {"tx.origin", "tx origin", "transaction origin",
                                  "origin authentication", "origin authorization"});
    add_all(VulnClass::UE,
            {"unchecked call", "unchecked return", "unchecked send", "unhandled exception",
             "unchecked low-level call", "call return value", "failed send",
             "unchecked transfer"});
    return t;
}

SynonymTable SynonymTable::load(const std::string& path) {
    SynonymTable t;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "bad synonym table " + path + ": " + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto c = class_from_abbrev(it.key());
        if (!c) {
            raise(Errc::config, "unknown class in synonym table: " + it.key());
        }
        for (const auto& phrase : it.value()) {
            t.add(phrase.get<std::string>(), *c);
        }
    }
    return t;
}

void SynonymTable::add(std::string phrase, VulnClass c) {
    entries_.emplace_back(to_lower(phrase), c);
    // Longest phrase wins; ties break alphabetically so lookup order is stable.
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
        return a.first < b.first;
    });
}

std::optional<VulnClass> SynonymTable::reclassify(std::string_view vuln_text,
                                                  const SwcMapping& mapping) const {
    std::string text = to_lower(vuln_text);
    for (VulnClass c : kAllClasses) {
        if (text.find(to_lower(mapping.entry(c).swc_id)) != std::string::npos) return c;
    }
    for (const auto& [phrase, c] : entries_) {
        if (text.find(phrase) != std::string::npos) return c;
    }
    for (VulnClass c : kAllClasses) {
        std::string name = to_lower(mapping.entry(c).display_name);
        if (text.find(name) != std::string::npos) return c;
        size_t paren = name.find(" (");
        if (paren != std::string::npos && text.find(name.substr(0, paren)) != std::string::npos) {
            return c;
        }
    }
    return std::nullopt;
}

ParsedDetection parse_detection_output(std::string_view text, const SwcMapping& mapping) {
    std::string lower = to_lower(text);
    if (lower.find(kCleanHeaderLc) != std::string::npos) {
        return {};  // listed classes are irrelevant under the "none" header
    }
    size_t header = lower.find(kVulnerableHeaderLc);
    if (header == std::string::npos) header = lower.find(kVulnerableHeaderWordsLc);
    if (header == std::string::npos) {
        raise(Errc::unparseable_response,
              "no detection header found in reply: " + std::string(text.substr(0, 120)));
    }

    std::string_view tail = std::string_view(lower).substr(header);
    ParsedDetection out;
    for (VulnClass c : kAllClasses) {
        const SwcEntry& e = mapping.entry(c);
        std::string id = to_lower(e.swc_id);
        std::string name = to_lower(e.display_name);
        std::string head = name;
        size_t paren = head.find(" (");
        if (paren != std::string::npos) head.resize(paren);
        if (tail.find(id) != std::string_view::npos ||
            tail.find(name) != std::string_view::npos ||
            tail.find(head) != std::string_view::npos) {
            out.labels.add(c);
        }
    }
    out.vacuous = out.labels.empty();
    return out;
}

Prediction detect_finetuned(LlmGateway& gateway, const ContractRecord& record,
                            const SwcMapping& mapping, const DetectOptions& options) {
    PromptRecord prompt;
    prompt.instruction = prompt_text::kDetectionInstruction;
    prompt.input = std::string(prompt_text::kDetectionInputPrefix) + record.cleaned_source;
    prompt.output.clear();  // the model completes this

    ChatRequest req;
    req.model = options.model;
    if (options.rendering == Rendering::AlpacaInstruct) {
        req.messages = {{"user", render_alpaca(prompt)}};
    } else {
        req.messages = {{"system", prompt.instruction}, {"user", prompt.input}};
    }

    Prediction pred;
    pred.address = record.address;
    pred.strategy = Strategy::Finetuned;
    pred.model = options.model;
    pred.fingerprints.push_back(request_fingerprint(req));

    std::string reply = gateway.chat_complete(req);
    try {
        ParsedDetection parsed = parse_detection_output(reply, mapping);
        pred.labels = parsed.labels;
        if (parsed.vacuous) {
            pred.warnings.push_back("vulnerable header with no recognizable classes");
        }
    } catch (const Error& e) {
        if (e.code() != Errc::unparseable_response || !options.lenient) throw;
        pred.labels = LabelSet{};
        pred.warnings.push_back(std::string("unparseable reply scored as clean: ") + e.what());
    }
    return pred;
}

ZeroShotResult detect_zero_shot(LlmGateway& gateway, const ContractRecord& record,
                                const SwcMapping& mapping, const SynonymTable& synonyms,
                                const std::string& model) {
    std::string system = replace_all(kZeroShotSystemPrompt, "{vulnerabilities}",
                                     mapping.vulnerability_block(LabelSet::all()));
    ChatRequest req;
    req.model = model;
    req.messages = {{"system", system}, {"user", record.cleaned_source}};
    req.response_schema = zero_shot_schema();
    req.function_name = "report_exploits";

    ZeroShotResult result;
    result.fingerprint = request_fingerprint(req);
    nlohmann::json value = gateway.chat_complete_structured(req);
    result.status = value["status"].get<std::string>() == "Exploit Found"
                        ? ZeroShotStatus::ExploitFound
                        : ZeroShotStatus::NoExploit;
    for (const auto& entry : value["exploits"]) {
        result.findings.push_back(finding_from_json(entry, mapping, synonyms));
    }
    return result;
}

CriticResult critic_pass(LlmGateway& gateway, const std::vector<Finding>& findings,
                         const SwcMapping& mapping, const SynonymTable& synonyms,
                         const std::string& model) {
    CriticResult result;
    if (findings.empty()) return result;

    ChatRequest req;
    req.model = model;
    req.messages = {{"system", kCriticSystemPrompt},
                    {"user",
                     "please critique these exploit and code combinations for Ethereum smart "
                     "contracts written in Solidity:\n\n" +
                         exploit_blocks(findings)}};
    req.response_schema = critic_schema();
    req.function_name = "critique_exploits";
    result.fingerprint = request_fingerprint(req);

    nlohmann::json value = gateway.chat_complete_structured(req);
    for (const auto& entry : value["exploits"]) {
        result.confirmed.push_back(finding_from_json(entry, mapping, synonyms));
    }
    for (const auto& entry : value["exploits_rejected"]) {
        result.rejected.push_back(finding_from_json(entry, mapping, synonyms));
    }
    std::string status = value["status"].get<std::string>();
    bool says_clean = status == "No changes recommended";
    if (says_clean != result.rejected.empty()) {
        raise(Errc::inconsistent_critic_status,
              "critic status '" + status + "' contradicts " +
                  std::to_string(result.rejected.size()) + " rejected exploits");
    }
    return result;
}

std::vector<Finding> gptlens_audit(LlmGateway& gateway, const ContractRecord& record,
                                   const SwcMapping& mapping, const SynonymTable& synonyms,
                                   const std::string& model, int top_k,
                                   std::string* fingerprint_out) {
    std::string system = replace_all(kAuditorSystemPrompt, "{vulnerabilities}",
                                     mapping.vulnerability_block(LabelSet::all()));
    system = replace_all(system, "{top_k}", std::to_string(top_k));

    ChatRequest req;
    req.model = model;
    req.messages = {{"system", system}, {"user", record.cleaned_source}};
    req.response_schema =
        nlohmann::json{{"type", "object"},
                       {"required", {"exploits"}},
                       {"properties", {{"exploits", zero_shot_schema()["properties"]["exploits"]}}}};
    req.function_name = "report_exploits";
    if (fingerprint_out) *fingerprint_out = request_fingerprint(req);

    nlohmann::json value = gateway.chat_complete_structured(req);
    std::vector<Finding> findings;
    for (const auto& entry : value["exploits"]) {
        if (static_cast<int>(findings.size()) >= top_k) break;  // keep the top of the order
        findings.push_back(finding_from_json(entry, mapping, synonyms));
    }
    return findings;
}

std::vector<std::pair<Finding, CriticScore>> gptlens_critic(
    LlmGateway& gateway, const std::vector<Finding>& findings, const std::string& model,
    const RankWeights& weights, std::string* fingerprint_out,
    std::vector<std::string>* warnings) {
    std::vector<std::pair<Finding, CriticScore>> scored;
    if (findings.empty()) return scored;

    ChatRequest req;
    req.model = model;
    req.messages = {{"system", kLensCriticSystemPrompt},
                    {"user", "grade these exploit and code combinations:\n\n" +
                                 exploit_blocks(findings)}};
    req.response_schema = scores_schema();
    req.function_name = "grade_exploits";
    if (fingerprint_out) *fingerprint_out = request_fingerprint(req);

    nlohmann::json value = gateway.chat_complete_structured(req);
    const nlohmann::json& scores = value["scores"];
    if (scores.size() != findings.size()) {
        raise(Errc::schema_violation,
              "$.scores: expected " + std::to_string(findings.size()) + " gradings, got " +
                  std::to_string(scores.size()));
    }
    for (size_t i = 0; i < findings.size(); ++i) {
        auto clamp_grade = [&](const char* axis) {
            double v = scores[i][axis].get<double>();
            if (v < 0 || v > 10) {
                if (warnings) {
                    warnings->push_back(std::string(axis) + " grade " + std::to_string(v) +
                                        " clamped to [0,10]");
                }
                v = std::clamp(v, 0.0, 10.0);
            }
            return v;
        };
        CriticScore s;
        s.correctness = clamp_grade("correctness");
        s.severity = clamp_grade("severity");
        s.profitability = clamp_grade("profitability");
        s.final_score = gptlens_rank(s, weights);
        scored.emplace_back(findings[i], s);
    }
    return scored;
}

double gptlens_rank(const CriticScore& score, const RankWeights& weights) {
    if (weights.correctness < 0 || weights.severity < 0 || weights.profitability < 0 ||
        std::abs(weights.correctness + weights.severity + weights.profitability - 1.0) > 1e-9) {
        raise(Errc::invalid_argument, "rank weights must be non-negative and sum to 1");
    }
    return weights.correctness * score.correctness + weights.severity * score.severity +
           weights.profitability * score.profitability;
}

LabelSet apply_threshold(const std::vector<std::pair<Finding, CriticScore>>& scored,
                         const ThresholdConfig& config) {
    LabelSet out;
    for (const auto& [finding, score] : scored) {
        if (!finding.mapped_class) continue;  // unmapped findings never reach scoring
        bool pass = config.correctness_inclusive
                        ? score.correctness >= config.correctness_bound
                        : score.correctness > config.correctness_bound;
        if (config.final_score_gt) {
            pass = pass && score.final_score > *config.final_score_gt;
        }
        if (pass) out.add(*finding.mapped_class);
    }
    return out;
}

std::vector<Prediction> random_baseline(uint64_t seed,
                                        const std::vector<std::string>& addresses) {
    Rng rng(seed);
    std::vector<Prediction> predictions;
    predictions.reserve(addresses.size());
    for (const std::string& address : addresses) {
        Prediction p;
        p.address = address;
        p.strategy = Strategy::Random;
        p.model = "random";
        size_t k = static_cast<size_t>(rng.below(5));  // 0..4 labels
        for (size_t idx : rng.sample_indices(kNumClasses, k)) {
            p.labels.add(kAllClasses[idx]);
        }
        predictions.push_back(std::move(p));
    }
    return predictions;
}

void save_predictions(const std::string& path, const std::vector<Prediction>& predictions) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io, "cannot open for writing: " + path);
    }
    for (const Prediction& p : predictions) {
        nlohmann::ordered_json j;
        j["address"] = p.address;
        j["labels"] = p.labels.abbrevs();
        j["strategy"] = strategy_name(p.strategy);
        j["model"] = p.model;
        j["fingerprints"] = p.fingerprints;
        if (!p.warnings.empty()) j["warnings"] = p.warnings;
        out << j.dump() << '\n';
    }
}

std::vector<Prediction> load_predictions(const std::string& path) {
    std::vector<Prediction> predictions;
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
        Prediction p;
        p.address = j.at("address").get<std::string>();
        for (const auto& label : j.at("labels")) {
            auto c = class_from_abbrev(label.get<std::string>());
            if (!c) {
                raise(Errc::parse, path + ":" + std::to_string(line_no) +
                                       ": unknown class " + label.get<std::string>());
            }
            p.labels.add(*c);
        }
        auto strategy = strategy_from_name(j.value("strategy", std::string{"random"}));
        p.strategy = strategy.value_or(Strategy::Random);
        p.model = j.value("model", std::string{});
        if (j.contains("fingerprints")) {
            p.fingerprints = j["fingerprints"].get<std::vector<std::string>>();
        }
        if (j.contains("warnings")) {
            p.warnings = j["warnings"].get<std::vector<std::string>>();
        }
        predictions.push_back(std::move(p));
    }
    return predictions;
}

}  // namespace solaudit
