#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

// The eight-class vulnerability taxonomy, in canonical order.
enum class VulnClass : uint8_t { LE = 0, ARTHM, DOS, RENT, TimeM, TimeO, TxOrigin, UE };

inline constexpr int kNumClasses = 8;
inline constexpr std::array<VulnClass, kNumClasses> kAllClasses = {
    VulnClass::LE,    VulnClass::ARTHM, VulnClass::DOS,      VulnClass::RENT,
    VulnClass::TimeM, VulnClass::TimeO, VulnClass::TxOrigin, VulnClass::UE,
};

std::string_view class_abbrev(VulnClass c);
std::optional<VulnClass> class_from_abbrev(std::string_view s);

// Subset of the eight classes, iterated in canonical order.
class LabelSet {
public:
    LabelSet() = default;
    static LabelSet all();
    static LabelSet from_bits(uint8_t bits) { return LabelSet(bits); }

    void add(VulnClass c) { bits_ |= bit(c); }
    void remove(VulnClass c) { bits_ &= static_cast<uint8_t>(~bit(c)); }
    bool contains(VulnClass c) const { return bits_ & bit(c); }
    bool empty() const { return bits_ == 0; }
    int size() const;
    uint8_t bits() const { return bits_; }

    std::vector<VulnClass> classes() const;  // canonical order
    std::vector<std::string> abbrevs() const;

    bool operator==(const LabelSet&) const = default;
    bool is_subset_of(const LabelSet& other) const { return (bits_ & ~other.bits_) == 0; }

private:
    explicit LabelSet(uint8_t bits) : bits_(bits) {}
    static uint8_t bit(VulnClass c) { return static_cast<uint8_t>(1u << static_cast<uint8_t>(c)); }
    uint8_t bits_ = 0;
};

struct SwcEntry {
    std::string swc_id;        // "SWC-107"
    std::string display_name;  // "Reentrancy"
};

// Total mapping VulnClass -> SWC id + display name. Only RENT's id is fixed
// by convention; the rest are configuration with shipped defaults.
class SwcMapping {
public:
    static SwcMapping defaults();

    const SwcEntry& entry(VulnClass c) const { return entries_[static_cast<size_t>(c)]; }
    void set(VulnClass c, SwcEntry e);

    // One "SWC-ID - Vulnerability name" line per class present, canonical order.
    std::string vulnerability_block(const LabelSet& labels) const;

private:
    std::array<SwcEntry, kNumClasses> entries_;
};

enum class Tool : uint8_t { Osiris = 0, Oyente, Mythril, Slither, SmartCheck };
inline constexpr int kNumTools = 5;
std::string_view tool_name(Tool t);
std::optional<Tool> tool_from_name(std::string_view s);

struct ToolFinding {
    Tool tool;
    std::string address;
    VulnClass vuln;
    std::string raw_detector_id;
};

// Per-tool detector-id -> class tables. Editable configuration; the shipped
// defaults follow the ScrawlD tool suite.
class DetectorTable {
public:
    static DetectorTable defaults();

    std::optional<VulnClass> map(Tool tool, std::string_view detector_id) const;
    void add(Tool tool, std::string detector_id, VulnClass c);
    std::set<Tool> tools_supporting(VulnClass c) const;

private:
    std::map<std::string, VulnClass> tables_[kNumTools];
};

// Which tools count toward each class's vote and how many are needed.
class VotePolicy {
public:
    // Strict majority of each class's supporting tools.
    static VotePolicy strict_majority(const DetectorTable& table);
    // Plain k-of-n over all five tools.
    static VotePolicy k_of_all(int k);

    const std::set<Tool>& supporting(VulnClass c) const {
        return supporting_[static_cast<size_t>(c)];
    }
    void set_supporting(VulnClass c, std::set<Tool> tools);
    int quorum(VulnClass c) const;
    void set_fixed_quorum(int k) { fixed_quorum_ = k; }

private:
    std::array<std::set<Tool>, kNumClasses> supporting_;
    int fixed_quorum_ = 0;  // 0 = strict majority of supporting tools
};

struct ReportLoad {
    std::vector<ToolFinding> findings;
    std::vector<std::string> unmapped_ids;  // warn-and-skip unless strict
};

// Reads one tool's normalized line-delimited report: {"address":..,"detector":..}
// per line. Unknown detector ids are collected (or fatal when strict).
ReportLoad load_tool_report(Tool tool, const std::string& path, const DetectorTable& table,
                            bool strict);

// Strict-majority vote for one address. Duplicate findings from the same tool
// count once; findings must all carry the given address.
LabelSet majority_vote(const std::vector<ToolFinding>& findings, const VotePolicy& policy,
                       std::string_view address);

struct LabelSummary {
    size_t total = 0;
    size_t vulnerable = 0;
    size_t clean = 0;
    std::array<size_t, kNumClasses> per_class{};
};

}  // namespace solaudit
