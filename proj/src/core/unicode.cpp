#include "core/unicode.hpp"

#include <algorithm>
#include <iterator>

namespace solaudit {

namespace {

struct CodepointRange {
    uint32_t lo;
    uint32_t hi;
};

#include "core/unicode_ranges.inc"

template <size_t N>
bool in_ranges(const CodepointRange (&ranges)[N], uint32_t cp) {
    auto it = std::upper_bound(std::begin(ranges), std::end(ranges), cp,
                               [](uint32_t v, const CodepointRange& r) { return v < r.lo; });
    return it != std::begin(ranges) && cp <= std::prev(it)->hi;
}

}  // namespace

bool is_letter(uint32_t cp) { return in_ranges(kLetterRanges, cp); }
bool is_number(uint32_t cp) { return in_ranges(kNumberRanges, cp); }
bool is_whitespace(uint32_t cp) { return in_ranges(kWhitespaceRanges, cp); }

DecodedChar decode_utf8(std::string_view text, size_t pos) {
    const auto byte = [&](size_t i) { return static_cast<uint8_t>(text[i]); };
    uint8_t b0 = byte(pos);
    if (b0 < 0x80) return {b0, 1, true};

    int len = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {b0, 1, false};
    }
    if (pos + len > text.size()) return {b0, 1, false};
    for (int i = 1; i < len; ++i) {
        uint8_t bi = byte(pos + i);
        if ((bi & 0xC0) != 0x80) return {b0, 1, false};
        cp = (cp << 6) | (bi & 0x3F);
    }
    // Reject overlong forms and surrogate/range violations.
    static constexpr uint32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinByLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return {b0, 1, false};
    }
    return {cp, static_cast<uint8_t>(len), true};
}

}  // namespace solaudit
