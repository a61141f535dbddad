#pragma once

// Independent Solidity-flavoured lexer used as the oracle for comment
// stripping: it drops comments and whitespace itself, so the token stream of
// a raw source must equal the token stream of its cleaned form. Kept apart
// from the implementation under test on purpose.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace testutil {

inline std::vector<std::string> lex_solidity(std::string_view src) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = src.size();
    auto is_ident = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
               static_cast<unsigned char>(c) >= 0x80;
    };
    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
        } else if (c == '"' || c == '\'') {
            size_t start = i;
            char quote = c;
            ++i;
            while (i < n) {
                if (src[i] == '\\' && i + 1 < n) i += 2;
                else if (src[i] == quote) { ++i; break; }
                else ++i;
            }
            tokens.emplace_back(src.substr(start, i - start));
        } else if (is_ident(c)) {
            size_t start = i;
            while (i < n && is_ident(src[i])) ++i;
            tokens.emplace_back(src.substr(start, i - start));
        } else {
            tokens.emplace_back(1, c);
            ++i;
        }
    }
    return tokens;
}

}  // namespace testutil
