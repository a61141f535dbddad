#pragma once

#include <string>
#include <string_view>

namespace solaudit {

// Removes Solidity line and block comments lexically. String literal contents
// are untouched; block comments do not nest (the first */ closes). A line
// whose only content was comments disappears entirely, so the line structure
// of the remaining code is preserved.
//
// Throws Error{UnterminatedBlockComment} / Error{UnterminatedString} with the
// 1-based line where the construct opened.
std::string strip_comments(std::string_view source);

// Collapses runs of two or more blank lines to one, strips trailing
// whitespace from every line, and terminates the file with exactly one
// newline. Empty input stays empty.
std::string collapse_blank_lines(std::string_view source);

// strip_comments followed by collapse_blank_lines.
std::string clean_source(std::string_view source);

}  // namespace solaudit
