#include "core/taxonomy.hpp"

#include "json.hpp"

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

constexpr std::string_view kAbbrevs[kNumClasses] = {
    "LE", "ARTHM", "DOS", "RENT", "TimeM", "TimeO", "TxOrigin", "UE",
};

constexpr std::string_view kToolNames[kNumTools] = {
    "osiris", "oyente", "mythril", "slither", "smartcheck",
};

}  // namespace

std::string_view class_abbrev(VulnClass c) { return kAbbrevs[static_cast<size_t>(c)]; }

std::optional<VulnClass> class_from_abbrev(std::string_view s) {
    std::string lower = to_lower(s);
    for (int i = 0; i < kNumClasses; ++i) {
        if (lower == to_lower(kAbbrevs[i])) return static_cast<VulnClass>(i);
    }
    if (lower == "tx-origin") return VulnClass::TxOrigin;  // table spelling
    return std::nullopt;
}

LabelSet LabelSet::all() { return LabelSet(0xFF); }

int LabelSet::size() const {
    int n = 0;
    for (uint8_t b = bits_; b; b &= b - 1) ++n;
    return n;
}

std::vector<VulnClass> LabelSet::classes() const {
    std::vector<VulnClass> out;
    for (VulnClass c : kAllClasses) {
        if (contains(c)) out.push_back(c);
    }
    return out;
}

std::vector<std::string> LabelSet::abbrevs() const {
    std::vector<std::string> out;
    for (VulnClass c : classes()) out.emplace_back(class_abbrev(c));
    return out;
}

SwcMapping SwcMapping::defaults() {
    SwcMapping m;
    m.set(VulnClass::LE, {"SWC-132", "Locked Ether"});
    m.set(VulnClass::ARTHM, {"SWC-101", "Arithmetic (Integer Overflow and Underflow)"});
    m.set(VulnClass::DOS, {"SWC-113", "Denial of Service"});
    m.set(VulnClass::RENT, {"SWC-107", "Reentrancy"});
    m.set(VulnClass::TimeM, {"SWC-116", "Time Manipulation (Block values as a proxy for time)"});
    m.set(VulnClass::TimeO, {"SWC-114", "Timestamp Ordering (Transaction Order Dependence)"});
    m.set(VulnClass::TxOrigin, {"SWC-115", "Authorization through tx.origin"});
    m.set(VulnClass::UE, {"SWC-104", "Unhandled Exception (Unchecked Call Return Value)"});
    return m;
}

void SwcMapping::set(VulnClass c, SwcEntry e) {
    entries_[static_cast<size_t>(c)] = std::move(e);
}

std::string SwcMapping::vulnerability_block(const LabelSet& labels) const {
    std::string out;
    bool first = true;
    for (VulnClass c : labels.classes()) {
        if (!first) out += '\n';
        const SwcEntry& e = entry(c);
        out += e.swc_id;
        out += " - ";
        out += e.display_name;
        first = false;
    }
    return out;
}

std::string_view tool_name(Tool t) { return kToolNames[static_cast<size_t>(t)]; }

std::optional<Tool> tool_from_name(std::string_view s) {
    std::string lower = to_lower(s);
    for (int i = 0; i < kNumTools; ++i) {
        if (lower == kToolNames[i]) return static_cast<Tool>(i);
    }
    return std::nullopt;
}

DetectorTable DetectorTable::defaults() {
    DetectorTable t;
    // Osiris
    t.add(Tool::Osiris, "arithmetic", VulnClass::ARTHM);
    t.add(Tool::Osiris, "integer_overflow", VulnClass::ARTHM);
    t.add(Tool::Osiris, "integer_underflow", VulnClass::ARTHM);
    t.add(Tool::Osiris, "reentrancy", VulnClass::RENT);
    t.add(Tool::Osiris, "time_dependency", VulnClass::TimeM);
    t.add(Tool::Osiris, "transaction_ordering_dependence", VulnClass::TimeO);
    // Oyente
    t.add(Tool::Oyente, "integer_overflow", VulnClass::ARTHM);
    t.add(Tool::Oyente, "integer_underflow", VulnClass::ARTHM);
    t.add(Tool::Oyente, "re_entrancy", VulnClass::RENT);
    t.add(Tool::Oyente, "reentrancy", VulnClass::RENT);
    t.add(Tool::Oyente, "timestamp_dependency", VulnClass::TimeM);
    t.add(Tool::Oyente, "transaction_ordering_dependence", VulnClass::TimeO);
    // Mythril
    t.add(Tool::Mythril, "Integer_Arithmetic_Bugs", VulnClass::ARTHM);
    t.add(Tool::Mythril, "Reentrancy", VulnClass::RENT);
    t.add(Tool::Mythril, "External_Call_To_User_Supplied_Address", VulnClass::RENT);
    t.add(Tool::Mythril, "Dependence_on_predictable_environment_variable", VulnClass::TimeM);
    t.add(Tool::Mythril, "Transaction_Order_Dependence", VulnClass::TimeO);
    t.add(Tool::Mythril, "Use_of_tx_origin", VulnClass::TxOrigin);
    t.add(Tool::Mythril, "Unchecked_Call_Return_Value", VulnClass::UE);
    t.add(Tool::Mythril, "DoS_with_block_gas_limit", VulnClass::DOS);
    t.add(Tool::Mythril, "Locked_Ether", VulnClass::LE);
    // Slither
    t.add(Tool::Slither, "reentrancy-eth", VulnClass::RENT);
    t.add(Tool::Slither, "reentrancy-no-eth", VulnClass::RENT);
    t.add(Tool::Slither, "reentrancy-benign", VulnClass::RENT);
    t.add(Tool::Slither, "reentrancy-events", VulnClass::RENT);
    t.add(Tool::Slither, "tx-origin", VulnClass::TxOrigin);
    t.add(Tool::Slither, "timestamp", VulnClass::TimeM);
    t.add(Tool::Slither, "locked-ether", VulnClass::LE);
    t.add(Tool::Slither, "unchecked-lowlevel", VulnClass::UE);
    t.add(Tool::Slither, "unchecked-send", VulnClass::UE);
    t.add(Tool::Slither, "unchecked-transfer", VulnClass::UE);
    t.add(Tool::Slither, "calls-loop", VulnClass::DOS);
    t.add(Tool::Slither, "costly-loop", VulnClass::DOS);
    // SmartCheck
    t.add(Tool::SmartCheck, "SOLIDITY_TX_ORIGIN", VulnClass::TxOrigin);
    t.add(Tool::SmartCheck, "SOLIDITY_LOCKED_MONEY", VulnClass::LE);
    t.add(Tool::SmartCheck, "SOLIDITY_UNCHECKED_CALL", VulnClass::UE);
    t.add(Tool::SmartCheck, "SOLIDITY_DIV_MUL", VulnClass::ARTHM);
    t.add(Tool::SmartCheck, "SOLIDITY_EXACT_TIME", VulnClass::TimeM);
    t.add(Tool::SmartCheck, "SOLIDITY_TRANSFER_IN_LOOP", VulnClass::DOS);
    t.add(Tool::SmartCheck, "SOLIDITY_GAS_LIMIT_IN_LOOPS", VulnClass::DOS);
    return t;
}

std::optional<VulnClass> DetectorTable::map(Tool tool, std::string_view detector_id) const {
    const auto& table = tables_[static_cast<size_t>(tool)];
    auto it = table.find(std::string(detector_id));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

void DetectorTable::add(Tool tool, std::string detector_id, VulnClass c) {
    tables_[static_cast<size_t>(tool)][std::move(detector_id)] = c;
}

std::set<Tool> DetectorTable::tools_supporting(VulnClass c) const {
    std::set<Tool> out;
    for (int t = 0; t < kNumTools; ++t) {
        for (const auto& [id, cls] : tables_[t]) {
            if (cls == c) {
                out.insert(static_cast<Tool>(t));
                break;
            }
        }
    }
    return out;
}

VotePolicy VotePolicy::strict_majority(const DetectorTable& table) {
    VotePolicy p;
    for (VulnClass c : kAllClasses) {
        std::set<Tool> tools = table.tools_supporting(c);
        if (tools.empty()) {
            raise(Errc::config,
                  std::string("no tool supports class ") + std::string(class_abbrev(c)));
        }
        p.supporting_[static_cast<size_t>(c)] = std::move(tools);
    }
    return p;
}

VotePolicy VotePolicy::k_of_all(int k) {
    if (k < 1 || k > kNumTools) {
        raise(Errc::config, "quorum k must be in [1, 5]");
    }
    VotePolicy p;
    std::set<Tool> all;
    for (int t = 0; t < kNumTools; ++t) all.insert(static_cast<Tool>(t));
    for (VulnClass c : kAllClasses) p.supporting_[static_cast<size_t>(c)] = all;
    p.fixed_quorum_ = k;
    return p;
}

void VotePolicy::set_supporting(VulnClass c, std::set<Tool> tools) {
    if (tools.empty()) {
        raise(Errc::config, "supporting tool set must be non-empty");
    }
    supporting_[static_cast<size_t>(c)] = std::move(tools);
}

int VotePolicy::quorum(VulnClass c) const {
    if (fixed_quorum_ > 0) return fixed_quorum_;
    return static_cast<int>(supporting(c).size()) / 2 + 1;
}

ReportLoad load_tool_report(Tool tool, const std::string& path, const DetectorTable& table,
                            bool strict) {
    ReportLoad out;
    std::string text = read_file(path);
    int line_no = 0;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::malformed_report,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!record.is_object() || !record.contains("address") || !record.contains("detector")) {
            raise(Errc::malformed_report,
                  path + ":" + std::to_string(line_no) + ": need address and detector fields");
        }
        std::string address = record["address"].get<std::string>();
        std::string detector = record["detector"].get<std::string>();
        if (!is_contract_address(address)) {
            raise(Errc::malformed_report,
                  path + ":" + std::to_string(line_no) + ": bad address " + address);
        }
        std::optional<VulnClass> cls = table.map(tool, detector);
        if (!cls) {
            if (strict) {
                raise(Errc::unknown_detector_id,
                      path + ":" + std::to_string(line_no) + ": unknown detector id '" +
                          detector + "' for " + std::string(tool_name(tool)));
            }
            out.unmapped_ids.push_back(detector);
            continue;
        }
        out.findings.push_back({tool, std::move(address), *cls, std::move(detector)});
    }
    return out;
}

LabelSet majority_vote(const std::vector<ToolFinding>& findings, const VotePolicy& policy,
                       std::string_view address) {
    // Distinct voting tools per class; duplicates from one tool are idempotent.
    std::array<std::set<Tool>, kNumClasses> votes;
    for (const ToolFinding& f : findings) {
        if (f.address != address) {
            raise(Errc::invalid_argument,
                  "finding for " + f.address + " passed to vote for " + std::string(address));
        }
        if (policy.supporting(f.vuln).count(f.tool)) {
            votes[static_cast<size_t>(f.vuln)].insert(f.tool);
        }
    }
    LabelSet result;
    for (VulnClass c : kAllClasses) {
        if (static_cast<int>(votes[static_cast<size_t>(c)].size()) >= policy.quorum(c)) {
            result.add(c);
        }
    }
    return result;
}

}  // namespace solaudit
