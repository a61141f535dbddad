#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/bpe.hpp"
#include "core/corpus.hpp"
#include "core/taxonomy.hpp"

namespace solaudit {

enum class PromptStyle { Detection, Generation };
enum class PromptCase { Vulnerable, Clean };
enum class Rendering { AlpacaInstruct, ChatMessages };

struct PromptRecord {
    std::string instruction;
    std::string input;
    std::string output;
    PromptStyle style;
    PromptCase prompt_case;
    std::string address;  // provenance only, never exported
};

// Fixed prompt texts. Training and inference must agree on these bytes, so
// they live here rather than in configuration.
namespace prompt_text {
inline constexpr const char* kDetectionInstruction =
    "You are an expert AI system trained to assist with smart contract security by "
    "analysing Solidity smart contracts for vulnerabilities.";
inline constexpr const char* kGenerationInstruction =
    "You are an expert AI system trained to assist with smart contract security by "
    "generating vulnerable and non-vulnerable smart contracts on the Ethereum blockchain, "
    "written in Solidity.";
inline constexpr const char* kDetectionInputPrefix =
    "Please analyse the following smart contract for vulnerabilities: ";
inline constexpr const char* kVulnerableOutputHeader =
    "The provided contract has 1 or more of the following vulnerabilities:";
inline constexpr const char* kCleanOutputHeader =
    "The provided smart contract has none of the following vulnerabilities:";
inline constexpr const char* kGenerateVulnerableHeader =
    "Generate an Ethereum smart contract written in Solidity that has 1 or more of the "
    "following vulnerabilities:";
inline constexpr const char* kGenerateCleanHeader =
    "Generate an Ethereum smart contract written in Solidity that has none of the "
    "following vulnerabilities:";
}  // namespace prompt_text

// Detection: the contract rides in the input; a vulnerable record's output
// lists its gold classes, a clean record's output lists all eight under the
// "has none of" header.
PromptRecord build_detection_prompt(const ContractRecord& record, const SwcMapping& mapping);

// Generation: the contract is the output; the input names all eight classes
// for both cases, differing only in the "1 or more" / "none" header.
PromptRecord build_generation_prompt(const ContractRecord& record, const SwcMapping& mapping);

// Instruction/input/response template rendering.
std::string render_alpaca(const PromptRecord& p);

struct ChatMessage {
    std::string role;
    std::string content;
};
// system = instruction, user = input, assistant = output.
std::vector<ChatMessage> render_chat(const PromptRecord& p);

// One {"messages":[...]} line, as the hosted fine-tuning upload expects.
std::string chat_line_json(const PromptRecord& p);

struct SubsetSpec {
    bool include_generation = false;
    size_t record_cap = 0;  // 0 = no cap; caps records, not prompt lines
    uint64_t seed = 0;
};

struct DatasetManifest {
    size_t total_records = 0;
    size_t detection_count = 0;
    size_t generation_count = 0;
    uint64_t token_total = 0;
    Rendering rendering = Rendering::AlpacaInstruct;
};

// Writes a line-delimited dataset (UTF-8, \n separators, no pretty printing)
// and returns the manifest. The record cap selects a seeded sample stratified
// by vulnerable/clean, preserving corpus order among the selected records.
DatasetManifest export_dataset(const std::vector<ContractRecord>& records,
                               const SwcMapping& mapping, Rendering rendering,
                               const std::string& path, const SubsetSpec& subset,
                               const Gpt2Bpe& tokenizer);

}  // namespace solaudit
