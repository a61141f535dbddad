#include "core/text_clean.hpp"

#include <cctype>
#include <vector>

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

std::string strip_comments(std::string_view source) {
    enum class State { code, line_comment, block_comment, string_literal };

    std::string out;
    out.reserve(source.size());
    std::string line;           // pending output for the current line
    bool line_had_comment = false;
    bool line_has_code = false;  // any non-whitespace survived on this line
    int line_no = 1;
    int construct_line = 0;     // where the open comment/string started
    char quote = 0;
    State state = State::code;

    auto flush_line = [&](bool with_newline) {
        // A line that held only comments vanishes with its newline.
        bool drop = line_had_comment && !line_has_code;
        if (!drop) {
            out += line;
            if (with_newline) out += '\n';
        }
        line.clear();
        line_had_comment = state == State::block_comment;
        line_has_code = false;
    };

    size_t i = 0;
    const size_t n = source.size();
    while (i < n) {
        char c = source[i];
        switch (state) {
            case State::code:
                if (c == '/' && i + 1 < n && source[i + 1] == '/') {
                    state = State::line_comment;
                    line_had_comment = true;
                    i += 2;
                } else if (c == '/' && i + 1 < n && source[i + 1] == '*') {
                    state = State::block_comment;
                    line_had_comment = true;
                    construct_line = line_no;
                    i += 2;
                } else if (c == '"' || c == '\'') {
                    state = State::string_literal;
                    quote = c;
                    construct_line = line_no;
                    line += c;
                    line_has_code = true;
                    ++i;
                } else if (c == '\n') {
                    flush_line(true);
                    ++line_no;
                    ++i;
                } else {
                    line += c;
                    if (!std::isspace(static_cast<unsigned char>(c))) line_has_code = true;
                    ++i;
                }
                break;

            case State::line_comment:
                if (c == '\n') {
                    state = State::code;
                    flush_line(true);
                    ++line_no;
                }
                ++i;
                break;

            case State::block_comment:
                if (c == '*' && i + 1 < n && source[i + 1] == '/') {
                    state = State::code;
                    i += 2;
                    // Deleting the comment must not fuse the tokens around it:
                    // `uint/*x*/y` stays two tokens.
                    if (!line.empty() &&
                        !std::isspace(static_cast<unsigned char>(line.back())) && i < n &&
                        !std::isspace(static_cast<unsigned char>(source[i])) &&
                        source[i] != '/' && source[i] != '*') {
                        line += ' ';
                    }
                } else if (c == '\n') {
                    flush_line(true);
                    ++line_no;
                    ++i;
                } else {
                    ++i;
                }
                break;

            case State::string_literal:
                if (c == '\\' && i + 1 < n) {
                    line += c;
                    line += source[i + 1];
                    i += 2;
                } else if (c == quote) {
                    state = State::code;
                    line += c;
                    ++i;
                } else if (c == '\n') {
                    throw Error(Errc::unterminated_string,
                                "unterminated string literal at line " +
                                    std::to_string(construct_line),
                                construct_line);
                } else {
                    line += c;
                    ++i;
                }
                break;
        }
    }

    if (state == State::block_comment) {
        throw Error(Errc::unterminated_block_comment,
                    "unterminated block comment at line " + std::to_string(construct_line),
                    construct_line);
    }
    if (state == State::string_literal) {
        throw Error(Errc::unterminated_string,
                    "unterminated string literal at line " + std::to_string(construct_line),
                    construct_line);
    }
    flush_line(false);
    return out;
}

std::string collapse_blank_lines(std::string_view source) {
    if (source.empty()) return {};

    std::vector<std::string_view> lines;
    size_t start = 0;
    while (start <= source.size()) {
        size_t pos = source.find('\n', start);
        if (pos == std::string_view::npos) {
            if (start < source.size()) lines.push_back(source.substr(start));
            break;
        }
        lines.push_back(source.substr(start, pos - start));
        start = pos + 1;
    }

    std::string out;
    out.reserve(source.size());
    bool prev_blank = false;
    for (std::string_view raw : lines) {
        size_t end = raw.size();
        while (end > 0 && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
        std::string_view stripped = raw.substr(0, end);
        bool blank = stripped.empty();
        if (blank && prev_blank) continue;
        out += stripped;
        out += '\n';
        prev_blank = blank;
    }
    return out;
}

std::string clean_source(std::string_view source) {
    return collapse_blank_lines(strip_comments(source));
}

}  // namespace solaudit
