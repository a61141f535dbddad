#include "doctest.h"

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/taxonomy.hpp"
#include "support/tempdir.hpp"

using namespace solaudit;

namespace {

const std::string kAddr = "0x" + std::string(40, 'a');

ToolFinding finding(Tool tool, VulnClass c) { return {tool, kAddr, c, "x"}; }

VotePolicy policy_with(VulnClass c, std::set<Tool> tools) {
    VotePolicy p = VotePolicy::strict_majority(DetectorTable::defaults());
    p.set_supporting(c, std::move(tools));
    return p;
}

}  // namespace

TEST_CASE("majority vote needs a strict majority of supporting tools") {
    VotePolicy p = policy_with(VulnClass::RENT, {Tool::Osiris, Tool::Oyente, Tool::Mythril,
                                                 Tool::Slither, Tool::SmartCheck});
    std::vector<ToolFinding> three = {finding(Tool::Osiris, VulnClass::RENT),
                                      finding(Tool::Oyente, VulnClass::RENT),
                                      finding(Tool::Mythril, VulnClass::RENT)};
    CHECK(majority_vote(three, p, kAddr).contains(VulnClass::RENT));

    std::vector<ToolFinding> two = {finding(Tool::Osiris, VulnClass::RENT),
                                    finding(Tool::Oyente, VulnClass::RENT)};
    CHECK_FALSE(majority_vote(two, p, kAddr).contains(VulnClass::RENT));
}

TEST_CASE("two supporting tools need both votes") {
    VotePolicy p = policy_with(VulnClass::LE, {Tool::Slither, Tool::SmartCheck});
    std::vector<ToolFinding> both = {finding(Tool::Slither, VulnClass::LE),
                                     finding(Tool::SmartCheck, VulnClass::LE)};
    CHECK(majority_vote(both, p, kAddr).contains(VulnClass::LE));
    std::vector<ToolFinding> one = {finding(Tool::Slither, VulnClass::LE)};
    CHECK_FALSE(majority_vote(one, p, kAddr).contains(VulnClass::LE));
}

TEST_CASE("votes outside the supporting set never count") {
    VotePolicy p = policy_with(VulnClass::LE, {Tool::Slither, Tool::SmartCheck});
    std::vector<ToolFinding> outsiders = {finding(Tool::Slither, VulnClass::LE),
                                          finding(Tool::Osiris, VulnClass::LE),
                                          finding(Tool::Oyente, VulnClass::LE)};
    CHECK_FALSE(majority_vote(outsiders, p, kAddr).contains(VulnClass::LE));
}

TEST_CASE("duplicate findings from one tool count once") {
    VotePolicy p = policy_with(VulnClass::RENT, {Tool::Osiris, Tool::Oyente, Tool::Mythril});
    std::vector<ToolFinding> spam = {finding(Tool::Osiris, VulnClass::RENT),
                                     finding(Tool::Osiris, VulnClass::RENT),
                                     finding(Tool::Osiris, VulnClass::RENT)};
    CHECK_FALSE(majority_vote(spam, p, kAddr).contains(VulnClass::RENT));
}

TEST_CASE("adding a vote is monotone") {
    Rng rng(7);
    VotePolicy p = VotePolicy::strict_majority(DetectorTable::defaults());
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ToolFinding> findings;
        for (int t = 0; t < kNumTools; ++t) {
            for (VulnClass c : kAllClasses) {
                if (rng.below(3) == 0) findings.push_back(finding(static_cast<Tool>(t), c));
            }
        }
        LabelSet before = majority_vote(findings, p, kAddr);
        Tool extra_tool = static_cast<Tool>(rng.below(kNumTools));
        VulnClass extra_class = kAllClasses[rng.below(kNumClasses)];
        findings.push_back(finding(extra_tool, extra_class));
        LabelSet after = majority_vote(findings, p, kAddr);
        CHECK(before.is_subset_of(after));
    }
}

TEST_CASE("tool reports load through the mapping table") {
    testutil::TempDir dir;
    std::string path = dir.write(
        "slither.jsonl",
        "{\"address\":\"" + kAddr + "\",\"detector\":\"reentrancy-eth\"}\n");
    ReportLoad load = load_tool_report(Tool::Slither, path, DetectorTable::defaults(), false);
    REQUIRE(load.findings.size() == 1);
    CHECK(load.findings[0].vuln == VulnClass::RENT);
    CHECK(load.findings[0].tool == Tool::Slither);
    CHECK(load.findings[0].raw_detector_id == "reentrancy-eth");
}

TEST_CASE("empty report file loads to nothing") {
    testutil::TempDir dir;
    std::string path = dir.write("osiris.jsonl", "");
    ReportLoad load = load_tool_report(Tool::Osiris, path, DetectorTable::defaults(), false);
    CHECK(load.findings.empty());
    CHECK(load.unmapped_ids.empty());
}

TEST_CASE("unknown detector ids warn by default and fail in strict mode") {
    testutil::TempDir dir;
    std::string path = dir.write(
        "mythril.jsonl", "{\"address\":\"" + kAddr + "\",\"detector\":\"Quantum_Bug\"}\n");
    ReportLoad lenient = load_tool_report(Tool::Mythril, path, DetectorTable::defaults(), false);
    CHECK(lenient.findings.empty());
    REQUIRE(lenient.unmapped_ids.size() == 1);
    CHECK(lenient.unmapped_ids[0] == "Quantum_Bug");

    CHECK_THROWS_WITH_AS(load_tool_report(Tool::Mythril, path, DetectorTable::defaults(), true),
                         doctest::Contains("Quantum_Bug"), Error);
}

TEST_CASE("malformed report lines are fatal") {
    testutil::TempDir dir;
    std::string path = dir.write("oyente.jsonl", "{not json}\n");
    CHECK_THROWS_AS(load_tool_report(Tool::Oyente, path, DetectorTable::defaults(), false),
                    Error);
    std::string path2 = dir.write("oyente2.jsonl", "{\"address\":\"nope\",\"detector\":\"x\"}\n");
    CHECK_THROWS_AS(load_tool_report(Tool::Oyente, path2, DetectorTable::defaults(), false),
                    Error);
}

TEST_CASE("vulnerability block renders ids and names in canonical order") {
    SwcMapping m = SwcMapping::defaults();
    LabelSet rent;
    rent.add(VulnClass::RENT);
    CHECK(m.vulnerability_block(rent) == "SWC-107 - Reentrancy");
    CHECK(m.vulnerability_block(LabelSet{}) == "");

    std::string all = m.vulnerability_block(LabelSet::all());
    CHECK(std::count(all.begin(), all.end(), '\n') == 7);
    CHECK(all.rfind("SWC-132 - Locked Ether", 0) == 0);  // LE is canonical first
    CHECK(all.find("SWC-104 - Unhandled Exception") != std::string::npos);
}

TEST_CASE("label set iterates in canonical order") {
    LabelSet s;
    s.add(VulnClass::UE);
    s.add(VulnClass::LE);
    s.add(VulnClass::RENT);
    CHECK(s.abbrevs() == std::vector<std::string>{"LE", "RENT", "UE"});
    CHECK(s.size() == 3);
    CHECK(LabelSet::all().size() == 8);
}
