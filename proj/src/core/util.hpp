#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view text, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// Accepts exactly "0x" + 40 hex digits.
bool is_contract_address(std::string_view s);

// Fixed 3-decimal display, round-half-up. Negative values are not produced
// by any metric here.
std::string format_metric(double value);

}  // namespace solaudit
