#include "doctest.h"

#include <atomic>

#include "core/detectors.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "support/mock_server.hpp"
#include "support/tempdir.hpp"

using namespace solaudit;

namespace {

const SwcMapping kMapping = SwcMapping::defaults();
const SynonymTable kSynonyms = SynonymTable::defaults();

ContractRecord record_fixture() {
    ContractRecord r;
    r.address = "0x" + std::string(40, 'd');
    r.cleaned_source = "contract Probe {\n    uint a;\n}\n";
    LabelSet labels;
    labels.add(VulnClass::RENT);
    r.gold_labels = labels;
    return r;
}

struct GatewayHarness {
    testutil::MockServer server;
    testutil::TempDir dir;
    std::shared_ptr<ResponseCache> cache;
    std::unique_ptr<LlmGateway> gateway;
    std::atomic<int> hits{0};

    explicit GatewayHarness(std::function<std::string(const nlohmann::json&)> responder) {
        server.server().Post("/v1/chat/completions",
                             [this, responder](const httplib::Request& req,
                                               httplib::Response& res) {
                                 hits.fetch_add(1);
                                 res.set_content(responder(nlohmann::json::parse(req.body)),
                                                 "application/json");
                             });
        server.start();
        cache = std::make_shared<ResponseCache>(dir.path("cache.jsonl"));
        EndpointConfig endpoint;
        endpoint.base_url = server.base_url();
        endpoint.api_key_env_var = "";
        endpoint.backoff_base_ms = 1;
        gateway = std::make_unique<LlmGateway>(endpoint, cache);
    }
};

LabelSet labels_of(std::initializer_list<VulnClass> classes) {
    LabelSet s;
    for (VulnClass c : classes) s.add(c);
    return s;
}

Finding mapped_finding(VulnClass c, const std::string& text) {
    Finding f;
    f.vuln_text = text;
    f.mapped_class = c;
    return f;
}

}  // namespace

TEST_CASE("parse_detection_output handles both headers") {
    std::string clean_reply =
        "The provided smart contract has none of the following vulnerabilities:\n" +
        kMapping.vulnerability_block(LabelSet::all());
    CHECK(parse_detection_output(clean_reply, kMapping).labels.empty());

    ParsedDetection two = parse_detection_output(
        "The provided contract has 1 or more of the following vulnerabilities:\n"
        "SWC-101 - Arithmetic\nSWC-104 - Unhandled Exception",
        kMapping);
    CHECK(two.labels == labels_of({VulnClass::ARTHM, VulnClass::UE}));
    CHECK_FALSE(two.vacuous);
}

TEST_CASE("parse_detection_output tolerates case and punctuation") {
    ParsedDetection parsed = parse_detection_output(
        "the provided contract HAS 1 OR MORE of the following vulnerabilities: "
        "**swc-107** (reentrancy)!",
        kMapping);
    CHECK(parsed.labels == labels_of({VulnClass::RENT}));
}

TEST_CASE("a vulnerable header with no recognizable class is vacuous") {
    ParsedDetection parsed = parse_detection_output(
        "The provided contract has 1 or more of the following vulnerabilities:\n"
        "quantum entanglement",
        kMapping);
    CHECK(parsed.labels.empty());
    CHECK(parsed.vacuous);
}

TEST_CASE("text without any header is unparseable") {
    try {
        parse_detection_output("I am a teapot", kMapping);
        FAIL("expected UnparseableResponse");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unparseable_response);
    }
}

TEST_CASE("finetuned detection parses scripted replies") {
    DetectOptions options;
    options.model = "mock-model";

    SUBCASE("reentrancy listed") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::content_reply(
                "The provided contract has 1 or more of the following vulnerabilities:\n"
                "SWC-107 - Reentrancy");
        });
        Prediction p = detect_finetuned(*h.gateway, record_fixture(), kMapping, options);
        CHECK(p.labels == labels_of({VulnClass::RENT}));
        CHECK(p.strategy == Strategy::Finetuned);
        CHECK(p.fingerprints.size() == 1);
    }
    SUBCASE("clean reply") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::content_reply(
                "The provided smart contract has none of the following vulnerabilities:\n"
                "SWC-107 - Reentrancy");
        });
        Prediction p = detect_finetuned(*h.gateway, record_fixture(), kMapping, options);
        CHECK(p.labels.empty());
        CHECK(p.warnings.empty());
    }
    SUBCASE("gibberish is lenient by default, strict on request") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::content_reply("gibberish");
        });
        Prediction p = detect_finetuned(*h.gateway, record_fixture(), kMapping, options);
        CHECK(p.labels.empty());
        REQUIRE(p.warnings.size() == 1);

        options.lenient = false;
        GatewayHarness strict([](const nlohmann::json&) {
            return testutil::content_reply("gibberish");
        });
        CHECK_THROWS_AS(detect_finetuned(*strict.gateway, record_fixture(), kMapping, options),
                        Error);
    }
    SUBCASE("alpaca rendering sends one user message ending at the response header") {
        GatewayHarness h([](const nlohmann::json& body) {
            CHECK(body["messages"].size() == 1);
            CHECK(body["messages"][0]["role"] == "user");
            std::string content = body["messages"][0]["content"].get<std::string>();
            CHECK(content.find("### Response:\n") == content.size() - 14);
            return testutil::content_reply(
                "The provided smart contract has none of the following vulnerabilities:");
        });
        options.rendering = Rendering::AlpacaInstruct;
        detect_finetuned(*h.gateway, record_fixture(), kMapping, options);
    }
}

TEST_CASE("zero-shot detection returns structured findings") {
    SUBCASE("no exploit") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"status", "No Exploit"}, {"exploits", nlohmann::json::array()}},
                "report_exploits");
        });
        ZeroShotResult r = detect_zero_shot(*h.gateway, record_fixture(), kMapping, kSynonyms,
                                            "mock-model");
        CHECK(r.status == ZeroShotStatus::NoExploit);
        CHECK(r.findings.empty());
    }
    SUBCASE("one reentrancy exploit maps to RENT") {
        GatewayHarness h([](const nlohmann::json& body) {
            std::string system = body["messages"][0]["content"].get<std::string>();
            CHECK(system.find("SWC-107 - Reentrancy") != std::string::npos);
            CHECK(system.find("Think step by step") != std::string::npos);
            return testutil::tool_reply(
                nlohmann::json{{"status", "Exploit Found"},
                               {"exploits",
                                {{{"vulnerability", "SWC-107 - Reentrancy"},
                                  {"code", "Lines 10-12: call.value"},
                                  {"reasoning", "state update after call"}}}}},
                "report_exploits");
        });
        ZeroShotResult r = detect_zero_shot(*h.gateway, record_fixture(), kMapping, kSynonyms,
                                            "mock-model");
        CHECK(r.status == ZeroShotStatus::ExploitFound);
        REQUIRE(r.findings.size() == 1);
        CHECK(r.findings[0].mapped_class == VulnClass::RENT);
        CHECK(r.findings[0].code_excerpt == "Lines 10-12: call.value");
    }
    SUBCASE("status outside the enum violates the schema") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"status", "maybe"}, {"exploits", nlohmann::json::array()}},
                "report_exploits");
        });
        try {
            detect_zero_shot(*h.gateway, record_fixture(), kMapping, kSynonyms, "mock-model");
            FAIL("expected SchemaViolation");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::schema_violation);
        }
    }
}

TEST_CASE("critic pass partitions findings and checks status consistency") {
    std::vector<Finding> findings = {mapped_finding(VulnClass::RENT, "SWC-107 - Reentrancy"),
                                     mapped_finding(VulnClass::ARTHM, "integer overflow")};

    SUBCASE("empty input never calls the model") {
        testutil::NetworkSentinel sentinel;
        testutil::TempDir dir;
        auto cache = std::make_shared<ResponseCache>(dir.path("cache.jsonl"));
        EndpointConfig endpoint;
        endpoint.base_url = sentinel.base_url();
        endpoint.api_key_env_var = "";
        LlmGateway gateway(endpoint, cache);
        CriticResult r = critic_pass(gateway, {}, kMapping, kSynonyms, "mock-model");
        CHECK(r.confirmed.empty());
        CHECK(r.rejected.empty());
        CHECK(sentinel.hits() == 0);
    }
    SUBCASE("confirming everything needs the no-changes status") {
        GatewayHarness h([](const nlohmann::json& body) {
            std::string user = body["messages"][1]["content"].get<std::string>();
            CHECK(user.find("======== EXPLOIT 1 ========") != std::string::npos);
            CHECK(user.find("======== EXPLOIT 2 ========") != std::string::npos);
            return testutil::tool_reply(
                nlohmann::json{{"status", "No changes recommended"},
                               {"exploits",
                                {{{"vulnerability", "SWC-107 - Reentrancy"},
                                  {"feedback", "checks out"}},
                                 {{"vulnerability", "integer overflow"},
                                  {"feedback", "confirmed"}}}},
                               {"exploits_rejected", nlohmann::json::array()}},
                "critique_exploits");
        });
        CriticResult r = critic_pass(*h.gateway, findings, kMapping, kSynonyms, "mock-model");
        CHECK(r.confirmed.size() == 2);
        CHECK(r.rejected.empty());
    }
    SUBCASE("rejecting one reports changes") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"status", "Changes recommended"},
                               {"exploits",
                                {{{"vulnerability", "SWC-107 - Reentrancy"},
                                  {"feedback", "real"}}}},
                               {"exploits_rejected",
                                {{{"vulnerability", "integer overflow"},
                                  {"reason", "guarded math"}}}}},
                "critique_exploits");
        });
        CriticResult r = critic_pass(*h.gateway, findings, kMapping, kSynonyms, "mock-model");
        REQUIRE(r.confirmed.size() == 1);
        REQUIRE(r.rejected.size() == 1);
        CHECK(r.confirmed[0].mapped_class == VulnClass::RENT);
        CHECK(r.rejected[0].mapped_class == VulnClass::ARTHM);
    }
    SUBCASE("a contradictory status is an error") {
        GatewayHarness h([](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"status", "No changes recommended"},
                               {"exploits", nlohmann::json::array()},
                               {"exploits_rejected",
                                {{{"vulnerability", "integer overflow"},
                                  {"reason", "nope"}}}}},
                "critique_exploits");
        });
        try {
            critic_pass(*h.gateway, findings, kMapping, kSynonyms, "mock-model");
            FAIL("expected InconsistentCriticStatus");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::inconsistent_critic_status);
        }
    }
}

TEST_CASE("gptlens audit truncates to top_k preserving order") {
    auto exploit = [](const std::string& name) {
        return nlohmann::json{{"vulnerability", name}, {"code", "c"}, {"reasoning", "r"}};
    };
    SUBCASE("three findings pass through") {
        GatewayHarness h([&](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"exploits",
                                {exploit("SWC-107 - Reentrancy"), exploit("integer overflow"),
                                 exploit("locked ether")}}},
                "report_exploits");
        });
        std::string fp;
        auto findings = gptlens_audit(*h.gateway, record_fixture(), kMapping, kSynonyms,
                                      "mock-model", 3, &fp);
        CHECK(findings.size() == 3);
        CHECK_FALSE(fp.empty());
    }
    SUBCASE("five findings truncate to three") {
        GatewayHarness h([&](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"exploits",
                                {exploit("first free text"), exploit("second"),
                                 exploit("third"), exploit("fourth"), exploit("fifth")}}},
                "report_exploits");
        });
        auto findings = gptlens_audit(*h.gateway, record_fixture(), kMapping, kSynonyms,
                                      "mock-model", 3, nullptr);
        REQUIRE(findings.size() == 3);
        CHECK(findings[0].vuln_text == "first free text");  // free text retained
        CHECK(findings[2].vuln_text == "third");
    }
}

TEST_CASE("gptlens critic grades align with findings and clamp") {
    std::vector<Finding> findings = {mapped_finding(VulnClass::RENT, "SWC-107"),
                                     mapped_finding(VulnClass::ARTHM, "overflow"),
                                     mapped_finding(VulnClass::LE, "locked ether")};
    auto grade = [](double c, double s, double p) {
        return nlohmann::json{{"correctness", c}, {"severity", s}, {"profitability", p}};
    };

    SUBCASE("scores map in order with the default weights") {
        GatewayHarness h([&](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"scores", {grade(8, 6, 4), grade(1, 1, 1), grade(10, 10, 10)}}},
                "grade_exploits");
        });
        std::vector<std::string> warnings;
        auto scored = gptlens_critic(*h.gateway, findings, "mock-model", RankWeights{},
                                     nullptr, &warnings);
        REQUIRE(scored.size() == 3);
        CHECK(scored[0].second.final_score == doctest::Approx(6.5));
        CHECK(scored[2].second.final_score == doctest::Approx(10.0));
        CHECK(warnings.empty());
    }
    SUBCASE("out-of-range grades clamp with a warning") {
        GatewayHarness h([&](const nlohmann::json&) {
            return testutil::tool_reply(
                nlohmann::json{{"scores", {grade(11, 5, -2), grade(1, 1, 1), grade(2, 2, 2)}}},
                "grade_exploits");
        });
        std::vector<std::string> warnings;
        auto scored = gptlens_critic(*h.gateway, findings, "mock-model", RankWeights{},
                                     nullptr, &warnings);
        CHECK(scored[0].second.correctness == 10.0);
        CHECK(scored[0].second.profitability == 0.0);
        CHECK(warnings.size() == 2);
    }
    SUBCASE("a grade count mismatch is a schema violation") {
        GatewayHarness h([&](const nlohmann::json&) {
            return testutil::tool_reply(nlohmann::json{{"scores", {grade(1, 1, 1)}}},
                                        "grade_exploits");
        });
        CHECK_THROWS_AS(gptlens_critic(*h.gateway, findings, "mock-model", RankWeights{},
                                       nullptr, nullptr),
                        Error);
    }
}

TEST_CASE("gptlens rank identities") {
    CHECK(gptlens_rank({10, 10, 10, 0}, RankWeights{}) == doctest::Approx(10.0));
    CHECK(gptlens_rank({8, 6, 4, 0}, RankWeights{}) == doctest::Approx(6.5));
    CHECK(gptlens_rank({7, 0, 0, 0}, RankWeights{1, 0, 0}) == doctest::Approx(7.0));
    CHECK_THROWS_AS(gptlens_rank({1, 1, 1, 0}, RankWeights{0.5, 0.5, 0.5}), Error);
}

TEST_CASE("threshold presets and boundaries") {
    std::vector<std::pair<Finding, CriticScore>> scored = {
        {mapped_finding(VulnClass::RENT, "r"), {1, 0, 0, 6}},
    };
    CHECK(apply_threshold(scored, threshold_preset("gte1c")) == labels_of({VulnClass::RENT}));
    CHECK(apply_threshold(scored, threshold_preset("gt1c")).empty());

    std::vector<std::pair<Finding, CriticScore>> strong = {
        {mapped_finding(VulnClass::ARTHM, "a"), {6, 0, 0, 5.5}},
    };
    CHECK(apply_threshold(strong, threshold_preset("gt5c")) == labels_of({VulnClass::ARTHM}));
    CHECK(apply_threshold(strong, threshold_preset("gt5f-gt5c")) ==
          labels_of({VulnClass::ARTHM}));
    strong[0].second.final_score = 5.0;  // fails final_score > 5
    CHECK(apply_threshold(strong, threshold_preset("gt5f-gt5c")).empty());

    CHECK(apply_threshold({}, threshold_preset("gt1c")).empty());

    Finding unmapped;
    unmapped.vuln_text = "novel heist";
    std::vector<std::pair<Finding, CriticScore>> outside = {{unmapped, {9, 9, 9, 9}}};
    CHECK(apply_threshold(outside, threshold_preset("gte1c")).empty());

    CHECK_THROWS_AS(threshold_preset("gt9c"), Error);
}

TEST_CASE("reclassify maps ids, synonyms and display names") {
    CHECK(kSynonyms.reclassify("SWC-107 - Reentrancy", kMapping) == VulnClass::RENT);
    CHECK(kSynonyms.reclassify("integer overflow in add()", kMapping) == VulnClass::ARTHM);
    CHECK(kSynonyms.reclassify("Authorization through tx.origin", kMapping) ==
          VulnClass::TxOrigin);
    CHECK(kSynonyms.reclassify("Unchecked Call Return Value", kMapping) == VulnClass::UE);
    CHECK_FALSE(kSynonyms.reclassify("flash loan price manipulation", kMapping).has_value());
    CHECK_FALSE(kSynonyms.reclassify("", kMapping).has_value());
}

TEST_CASE("random baseline is seeded and bounded") {
    std::vector<std::string> addresses;
    for (int i = 0; i < 500; ++i) {
        addresses.push_back("0x" + std::string(38, 'e') +
                            static_cast<char>('0' + i / 100) +
                            static_cast<char>('0' + i % 10));
    }
    std::vector<Prediction> first = random_baseline(1234, addresses);
    std::vector<Prediction> second = random_baseline(1234, addresses);
    REQUIRE(first.size() == addresses.size());
    bool any_nonempty = false;
    for (size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].labels == second[i].labels);
        CHECK(first[i].labels.size() <= 4);
        any_nonempty = any_nonempty || !first[i].labels.empty();
    }
    CHECK(any_nonempty);

    std::vector<Prediction> other = random_baseline(99, addresses);
    size_t differing = 0;
    for (size_t i = 0; i < first.size(); ++i) {
        if (!(first[i].labels == other[i].labels)) ++differing;
    }
    CHECK(differing > 0);
}

TEST_CASE("predictions round-trip through the run file format") {
    testutil::TempDir dir;
    Prediction p;
    p.address = "0x" + std::string(40, '9');
    p.labels = labels_of({VulnClass::RENT, VulnClass::UE});
    p.strategy = Strategy::ZeroShot;
    p.model = "mock-model";
    p.fingerprints = {"abc123"};
    p.warnings = {"one warning"};

    std::string path = dir.path("predictions.jsonl");
    save_predictions(path, {p});
    std::vector<Prediction> loaded = load_predictions(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].address == p.address);
    CHECK(loaded[0].labels == p.labels);
    CHECK(loaded[0].strategy == Strategy::ZeroShot);
    CHECK(loaded[0].fingerprints == p.fingerprints);
    CHECK(loaded[0].warnings == p.warnings);
}
