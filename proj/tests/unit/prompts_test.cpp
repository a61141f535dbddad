#include "doctest.h"

#include "core/bpe.hpp"
#include "core/error.hpp"
#include "core/gateway.hpp"
#include "core/prompts.hpp"
#include "core/util.hpp"
#include "support/paths.hpp"
#include "support/tempdir.hpp"

using namespace solaudit;

namespace {

ContractRecord golden_record(LabelSet labels) {
    ContractRecord r;
    r.address = "0x" + std::string(40, 'f');
    r.cleaned_source = "contract Golden {\n    uint a;\n}\n";
    r.gold_labels = labels;
    return r;
}

LabelSet rent_only() {
    LabelSet s;
    s.add(VulnClass::RENT);
    return s;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("detection prompt for a vulnerable record lists only the gold classes") {
    SwcMapping m = SwcMapping::defaults();
    PromptRecord p = build_detection_prompt(golden_record(rent_only()), m);
    CHECK(p.style == PromptStyle::Detection);
    CHECK(p.prompt_case == PromptCase::Vulnerable);
    CHECK(p.output ==
          "The provided contract has 1 or more of the following vulnerabilities:\n"
          "SWC-107 - Reentrancy");
    CHECK(p.input.rfind("Please analyse the following smart contract for vulnerabilities: ",
                        0) == 0);
    CHECK(p.input.find("contract Golden") != std::string::npos);
}

TEST_CASE("detection prompt for a clean record lists all eight classes") {
    SwcMapping m = SwcMapping::defaults();
    PromptRecord p = build_detection_prompt(golden_record(LabelSet{}), m);
    CHECK(p.prompt_case == PromptCase::Clean);
    CHECK(p.output.rfind("The provided smart contract has none of the following "
                         "vulnerabilities:\n",
                         0) == 0);
    CHECK(count_occurrences(p.output, "SWC-") == 8);
}

TEST_CASE("both detection cases share the instruction bytes") {
    SwcMapping m = SwcMapping::defaults();
    PromptRecord vulnerable = build_detection_prompt(golden_record(rent_only()), m);
    PromptRecord clean = build_detection_prompt(golden_record(LabelSet{}), m);
    CHECK(vulnerable.instruction == clean.instruction);
    CHECK(vulnerable.instruction == prompt_text::kDetectionInstruction);
}

TEST_CASE("generation prompts carry the contract in the output") {
    SwcMapping m = SwcMapping::defaults();
    ContractRecord record = golden_record(rent_only());
    PromptRecord vulnerable = build_generation_prompt(record, m);
    CHECK(vulnerable.style == PromptStyle::Generation);
    CHECK(vulnerable.input.find("has 1 or more of the following vulnerabilities:") !=
          std::string::npos);
    CHECK(count_occurrences(vulnerable.input, "SWC-") == 8);
    CHECK(vulnerable.output == record.cleaned_source);

    PromptRecord clean = build_generation_prompt(golden_record(LabelSet{}), m);
    CHECK(clean.input.find("has none of the following vulnerabilities:") != std::string::npos);
    CHECK(count_occurrences(clean.input, "SWC-") == 8);
}

TEST_CASE("prompts require labels") {
    ContractRecord unlabeled;
    unlabeled.address = "0x" + std::string(40, '1');
    CHECK_THROWS_AS(build_detection_prompt(unlabeled, SwcMapping::defaults()), Error);
}

TEST_CASE("alpaca rendering emits each section once and keeps fields verbatim") {
    PromptRecord p;
    p.instruction = "INSTRUCTION-BYTES";
    p.input = "INPUT-BYTES";
    p.output = "OUTPUT-BYTES";
    std::string text = render_alpaca(p);
    CHECK(count_occurrences(text, "### Instruction:") == 1);
    CHECK(count_occurrences(text, "### Input:") == 1);
    CHECK(count_occurrences(text, "### Response:") == 1);
    CHECK(text.find(p.instruction) != std::string::npos);
    CHECK(text.find(p.input) != std::string::npos);
    CHECK(text.find(p.output) != std::string::npos);

    p.input.clear();  // the Input section stays even when empty
    CHECK(count_occurrences(render_alpaca(p), "### Input:") == 1);
}

TEST_CASE("chat rendering is system/user/assistant in order") {
    SwcMapping m = SwcMapping::defaults();
    PromptRecord p = build_detection_prompt(golden_record(rent_only()), m);
    std::vector<ChatMessage> messages = render_chat(p);
    REQUIRE(messages.size() == 3);
    CHECK(messages[0].role == "system");
    CHECK(messages[1].role == "user");
    CHECK(messages[2].role == "assistant");
    CHECK(messages[0].content == p.instruction);
    CHECK(messages[1].content == p.input);
    CHECK(messages[2].content == p.output);
}

TEST_CASE("chat lines pass the fine-tune upload validation") {
    testutil::TempDir dir;
    SwcMapping m = SwcMapping::defaults();
    std::string lines = chat_line_json(build_detection_prompt(golden_record(rent_only()), m)) +
                        "\n" +
                        chat_line_json(build_detection_prompt(golden_record(LabelSet{}), m)) +
                        "\n";
    std::string path = dir.write("dataset.jsonl", lines);
    CHECK_NOTHROW(validate_chat_dataset(path));
}

TEST_CASE("export writes both styles and a recomputable token total") {
    testutil::TempDir dir;
    auto bpe = Gpt2Bpe::load_dir(testutil::bpe_data_dir());
    SwcMapping m = SwcMapping::defaults();

    std::vector<ContractRecord> records;
    for (int i = 0; i < 5; ++i) {
        ContractRecord r = golden_record(i % 2 ? rent_only() : LabelSet{});
        r.address = "0x" + std::string(39, 'a') + static_cast<char>('0' + i);
        records.push_back(r);
    }

    SubsetSpec both;
    both.include_generation = true;
    std::string path = dir.path("dataset.jsonl");
    DatasetManifest manifest =
        export_dataset(records, m, Rendering::AlpacaInstruct, path, both, *bpe);
    CHECK(manifest.total_records == 10);  // two prompts per record
    CHECK(manifest.detection_count == 5);
    CHECK(manifest.generation_count == 5);

    // Recompute the token total from the file contents.
    uint64_t recount = 0;
    for (const std::string& line : split(read_file(path), '\n')) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        PromptRecord p;
        p.instruction = j["instruction"].get<std::string>();
        p.input = j["input"].get<std::string>();
        p.output = j["output"].get<std::string>();
        recount += bpe->count(render_alpaca(p));
    }
    CHECK(recount == manifest.token_total);
}

TEST_CASE("export cap above corpus size keeps everything") {
    testutil::TempDir dir;
    auto bpe = Gpt2Bpe::load_dir(testutil::bpe_data_dir());
    std::vector<ContractRecord> records;
    for (int i = 0; i < 10; ++i) {
        ContractRecord r = golden_record(i % 3 ? rent_only() : LabelSet{});
        r.address = "0x" + std::string(39, 'b') + static_cast<char>('0' + i);
        records.push_back(r);
    }
    SubsetSpec spec;
    spec.record_cap = 4000;
    DatasetManifest manifest = export_dataset(records, SwcMapping::defaults(),
                                              Rendering::ChatMessages, dir.path("d.jsonl"),
                                              spec, *bpe);
    CHECK(manifest.total_records == 10);
    CHECK(manifest.generation_count == 0);
}

TEST_CASE("export is byte-deterministic and caps stratified by label state") {
    testutil::TempDir dir;
    auto bpe = Gpt2Bpe::load_dir(testutil::bpe_data_dir());
    std::vector<ContractRecord> records;
    for (int i = 0; i < 20; ++i) {
        ContractRecord r = golden_record(i < 10 ? rent_only() : LabelSet{});
        r.address = "0x" + std::string(38, 'c') +
                    static_cast<char>('0' + i / 10) + static_cast<char>('0' + i % 10);
        records.push_back(r);
    }
    SubsetSpec spec;
    spec.record_cap = 10;
    spec.seed = 99;
    DatasetManifest m1 = export_dataset(records, SwcMapping::defaults(),
                                        Rendering::ChatMessages, dir.path("a.jsonl"), spec,
                                        *bpe);
    export_dataset(records, SwcMapping::defaults(), Rendering::ChatMessages,
                   dir.path("b.jsonl"), spec, *bpe);
    CHECK(read_file(dir.path("a.jsonl")) == read_file(dir.path("b.jsonl")));
    CHECK(m1.total_records == 10);

    // Half vulnerable, half clean in, so the stratified sample keeps 5 + 5.
    size_t vulnerable = 0;
    for (const std::string& line : split(read_file(dir.path("a.jsonl")), '\n')) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        std::string output = j["messages"][2]["content"].get<std::string>();
        if (output.find("has 1 or more") != std::string::npos) ++vulnerable;
    }
    CHECK(vulnerable == 5);
}
