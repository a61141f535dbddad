#include "doctest.h"

#include "core/bpe.hpp"
#include "core/corpus.hpp"
#include "core/text_clean.hpp"
#include "core/util.hpp"
#include "support/paths.hpp"
#include "support/tempdir.hpp"

using namespace solaudit;

namespace {

ContractRecord record_with_tokens(uint64_t count, char tag) {
    ContractRecord r;
    r.address = "0x" + std::string(40, tag);
    r.token_count = count;
    return r;
}

}  // namespace

TEST_CASE("budget filter keeps the boundary and preserves order") {
    CorpusConfig config;  // max_tokens defaults to 7340
    std::vector<ContractRecord> records = {record_with_tokens(100, '1'),
                                           record_with_tokens(7340, '2'),
                                           record_with_tokens(7341, '3')};
    BudgetSplit split = filter_by_budget(records, config);
    REQUIRE(split.kept.size() == 2);
    CHECK(split.kept[0].token_count == 100);
    CHECK(split.kept[1].token_count == 7340);
    REQUIRE(split.excluded.size() == 1);
    CHECK(split.excluded[0].token_count == 7341);
}

TEST_CASE("budget filter edge cases") {
    CorpusConfig config;
    CHECK(filter_by_budget({}, config).kept.empty());
    CHECK(filter_by_budget({}, config).excluded.empty());

    std::vector<ContractRecord> all_over = {record_with_tokens(8000, '1'),
                                            record_with_tokens(9000, '2')};
    BudgetSplit split = filter_by_budget(all_over, config);
    CHECK(split.kept.empty());
    CHECK(split.excluded.size() == 2);
}

TEST_CASE("budget filter partitions its input") {
    CorpusConfig config;
    config.max_tokens = 50;
    std::vector<ContractRecord> records;
    for (int i = 0; i < 30; ++i) {
        records.push_back(record_with_tokens(static_cast<uint64_t>(i * 7 % 100),
                                             static_cast<char>('a' + i % 6)));
    }
    BudgetSplit split = filter_by_budget(records, config);
    CHECK(split.kept.size() + split.excluded.size() == records.size());
    for (const auto& r : split.kept) CHECK(r.token_count <= 50);
    for (const auto& r : split.excluded) CHECK(r.token_count > 50);
}

TEST_CASE("corpus persists one record per line and round-trips") {
    testutil::TempDir dir;
    auto bpe = Gpt2Bpe::load_dir(testutil::bpe_data_dir());

    ContractRecord r1;
    r1.address = "0x" + std::string(40, 'a');
    r1.raw_source = read_file(testutil::fixture("sol/20_realistic_token.sol"));
    r1.cleaned_source = clean_source(r1.raw_source);
    r1.token_count = bpe->count(r1.cleaned_source);
    r1.solc_version = "v0.4.18+commit.9cf6e910";

    ContractRecord r2 = r1;
    r2.address = "0x" + std::string(40, 'b');
    LabelSet labels;
    labels.add(VulnClass::ARTHM);
    labels.add(VulnClass::RENT);
    r2.gold_labels = labels;

    std::string path = dir.path("corpus.jsonl");
    save_corpus(path, {r1, r2});
    std::vector<ContractRecord> loaded = load_corpus(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].address == r1.address);
    CHECK(loaded[0].cleaned_source == r1.cleaned_source);
    CHECK(loaded[0].token_count == r1.token_count);
    CHECK_FALSE(loaded[0].gold_labels.has_value());
    REQUIRE(loaded[1].gold_labels.has_value());
    CHECK(*loaded[1].gold_labels == labels);

    // Stored counts must be reproducible from the stored cleaned source.
    for (const ContractRecord& r : loaded) {
        CHECK(bpe->count(r.cleaned_source) == r.token_count);
    }
}

TEST_CASE("label_corpus fills labels and counts the split") {
    std::vector<ContractRecord> records;
    for (char tag : {'a', 'b', 'c'}) {
        ContractRecord r;
        r.address = "0x" + std::string(40, tag);
        records.push_back(r);
    }

    VotePolicy policy = VotePolicy::strict_majority(DetectorTable::defaults());
    SUBCASE("no findings leaves every record clean") {
        LabelSummary summary = label_corpus(records, {}, policy);
        CHECK(summary.total == 3);
        CHECK(summary.clean == 3);
        CHECK(summary.vulnerable == 0);
        for (const auto& r : records) {
            REQUIRE(r.gold_labels.has_value());
            CHECK(r.gold_labels->empty());
        }
    }

    SUBCASE("unanimous reentrancy labels one record") {
        std::vector<ToolFinding> findings;
        for (Tool t : {Tool::Osiris, Tool::Oyente, Tool::Mythril, Tool::Slither}) {
            findings.push_back({t, records[0].address, VulnClass::RENT, "r"});
        }
        LabelSummary summary = label_corpus(records, findings, policy);
        CHECK(summary.vulnerable == 1);
        CHECK(summary.clean == 2);
        CHECK(summary.per_class[static_cast<size_t>(VulnClass::RENT)] == 1);
        CHECK(records[0].gold_labels->contains(VulnClass::RENT));
    }
}
