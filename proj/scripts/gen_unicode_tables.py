#!/usr/bin/env python3
"""Regenerate src/core/unicode_ranges.inc.

Emits sorted codepoint ranges for the Letter (L*) and Number (N*) general
categories plus the White_Space list, as consumed by the pre-tokenizer's
character classifier. Requires only the stdlib.
"""
import sys
import unicodedata

WHITESPACE = [
    (0x0009, 0x000D), (0x0020, 0x0020), (0x0085, 0x0085), (0x00A0, 0x00A0),
    (0x1680, 0x1680), (0x2000, 0x200A), (0x2028, 0x2029), (0x202F, 0x202F),
    (0x205F, 0x205F), (0x3000, 0x3000),
]


def ranges_for(categories):
    out = []
    start = None
    prev = None
    for cp in range(0x110000):
        cat = unicodedata.category(chr(cp))
        if cat in categories:
            if start is None:
                start = cp
            prev = cp
        else:
            if start is not None:
                out.append((start, prev))
                start = None
    if start is not None:
        out.append((start, prev))
    return out


def emit(f, name, ranges):
    f.write(f"inline constexpr CodepointRange {name}[] = {{\n")
    for i in range(0, len(ranges), 4):
        chunk = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in ranges[i:i + 4])
        f.write(f"    {chunk},\n")
    f.write("};\n\n")


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "src/core/unicode_ranges.inc"
    letters = ranges_for({"Lu", "Ll", "Lt", "Lm", "Lo"})
    numbers = ranges_for({"Nd", "Nl", "No"})
    with open(out_path, "w") as f:
        f.write("// Generated by scripts/gen_unicode_tables.py -- do not edit by hand.\n")
        f.write(f"// Unicode data version: {unicodedata.unidata_version}\n\n")
        emit(f, "kLetterRanges", letters)
        emit(f, "kNumberRanges", numbers)
        emit(f, "kWhitespaceRanges", WHITESPACE)
    print(f"wrote {out_path}: {len(letters)} letter ranges, {len(numbers)} number ranges")


if __name__ == "__main__":
    main()
