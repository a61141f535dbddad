#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/corpus.hpp"
#include "core/gateway.hpp"
#include "core/taxonomy.hpp"

namespace solaudit {

enum class Strategy { Finetuned, ZeroShot, ZeroShotCritic, GptLens, Random };
std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view s);

struct Prediction {
    std::string address;
    LabelSet labels;
    Strategy strategy = Strategy::Random;
    std::string model;
    std::vector<std::string> fingerprints;  // provenance into the response cache
    std::vector<std::string> warnings;
};

struct Finding {
    std::string vuln_text;  // as asserted by the model
    std::optional<VulnClass> mapped_class;
    std::string code_excerpt;
    std::string reasoning;
};

struct CriticScore {
    double correctness = 0;
    double severity = 0;
    double profitability = 0;
    double final_score = 0;
};

struct RankWeights {
    double correctness = 0.5;
    double severity = 0.25;
    double profitability = 0.25;
};

struct ThresholdConfig {
    std::string name;
    bool correctness_inclusive = false;  // >= vs >
    double correctness_bound = 1;
    std::optional<double> final_score_gt;
};

// Named presets: gte1c, gt1c ... gt7c, gt5f-gt5c.
ThresholdConfig threshold_preset(std::string_view name);
std::vector<std::string> threshold_preset_names();

// Free-text-to-class mapping: SWC ids, display names, then a configurable
// synonym table (longest phrase wins). No match means the finding stays
// outside the taxonomy and never reaches scoring.
class SynonymTable {
public:
    static SynonymTable defaults();
    static SynonymTable load(const std::string& path);

    void add(std::string phrase, VulnClass c);
    std::optional<VulnClass> reclassify(std::string_view vuln_text,
                                        const SwcMapping& mapping) const;

private:
    std::vector<std::pair<std::string, VulnClass>> entries_;  // lowercase, longest first
};

struct ParsedDetection {
    LabelSet labels;
    bool vacuous = false;  // header present but nothing recognizable listed
};

// Inverse of the detection-prompt output format. The "has none of" header
// wins regardless of what is listed under it; otherwise every class whose
// SWC id or display name appears after the "1 or more" header is included.
// Throws Error{UnparseableResponse} when neither header is present.
ParsedDetection parse_detection_output(std::string_view text, const SwcMapping& mapping);

enum class ZeroShotStatus { NoExploit, ExploitFound };

struct ZeroShotResult {
    ZeroShotStatus status = ZeroShotStatus::NoExploit;
    std::vector<Finding> findings;
    std::string fingerprint;
};

struct CriticResult {
    std::vector<Finding> confirmed;
    std::vector<Finding> rejected;
    std::string fingerprint;  // empty when no call was made
};

struct DetectOptions {
    std::string model;
    Rendering rendering = Rendering::ChatMessages;
    bool lenient = true;  // unparseable replies predict {} with a warning
    int top_k = 3;
    RankWeights weights;
    ThresholdConfig threshold = threshold_preset("gt1c");
};

// Fine-tuned detection: sends the detection prompt (instruction + input, no
// output) in the configured rendering and parses the reply.
Prediction detect_finetuned(LlmGateway& gateway, const ContractRecord& record,
                            const SwcMapping& mapping, const DetectOptions& options);

// Zero-shot structured detection with the fixed auditor system prompt and a
// function-call schema enforcing status in {"No Exploit","Exploit Found"}.
ZeroShotResult detect_zero_shot(LlmGateway& gateway, const ContractRecord& record,
                                const SwcMapping& mapping, const SynonymTable& synonyms,
                                const std::string& model);

// Critic post-pass over findings. Empty input short-circuits without a call.
// The reply must keep status consistent with its rejected list.
CriticResult critic_pass(LlmGateway& gateway, const std::vector<Finding>& findings,
                         const SwcMapping& mapping, const SynonymTable& synonyms,
                         const std::string& model);

// GPTLens-style open audit constrained to the eight classes; at most top_k
// findings, order preserved.
std::vector<Finding> gptlens_audit(LlmGateway& gateway, const ContractRecord& record,
                                   const SwcMapping& mapping, const SynonymTable& synonyms,
                                   const std::string& model, int top_k,
                                   std::string* fingerprint_out);

// Few-shot critic grading each finding 0-10 on the three axes. Out-of-range
// grades clamp with a warning.
std::vector<std::pair<Finding, CriticScore>> gptlens_critic(
    LlmGateway& gateway, const std::vector<Finding>& findings, const std::string& model,
    const RankWeights& weights, std::string* fingerprint_out,
    std::vector<std::string>* warnings);

double gptlens_rank(const CriticScore& score, const RankWeights& weights);

// Classes of the scored findings that pass every configured comparison.
LabelSet apply_threshold(const std::vector<std::pair<Finding, CriticScore>>& scored,
                         const ThresholdConfig& config);

// Uniform k in {0..4}, then k distinct classes; fully determined by the seed.
std::vector<Prediction> random_baseline(uint64_t seed, const std::vector<std::string>& addresses);

// Predictions file: one line-delimited record per contract.
void save_predictions(const std::string& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::string& path);

}  // namespace solaudit
