#pragma once

#include <cstdint>
#include <string_view>

namespace solaudit {

// Minimal unicode support for the BPE pre-tokenizer: UTF-8 decoding plus the
// three character classes the split pattern needs.

bool is_letter(uint32_t cp);      // general category L*
bool is_number(uint32_t cp);      // general category N*
bool is_whitespace(uint32_t cp);  // White_Space property

struct DecodedChar {
    uint32_t codepoint;
    uint8_t length;  // bytes consumed (1..4); 1 for an invalid lead byte
    bool valid;
};

// Decodes one UTF-8 sequence at `pos`. An invalid or truncated sequence is
// reported as a single raw byte with valid=false, so arbitrary byte input
// still round-trips through the byte-level encoder.
DecodedChar decode_utf8(std::string_view text, size_t pos);

}  // namespace solaudit
