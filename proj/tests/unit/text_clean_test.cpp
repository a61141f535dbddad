#include "doctest.h"

#include <filesystem>

#include "core/error.hpp"
#include "core/text_clean.hpp"
#include "core/util.hpp"
#include "support/paths.hpp"
#include "support/sol_lexer.hpp"

using namespace solaudit;

TEST_CASE("strip_comments removes line comments and their empty lines") {
    CHECK(strip_comments("// note\nuint a;") == "uint a;");
    CHECK(strip_comments("uint a; // tail\nuint b;") == "uint a; \nuint b;");
}

TEST_CASE("strip_comments removes inline block comments") {
    CHECK(strip_comments("uint a; /* x */ uint b;") == "uint a;  uint b;");
}

TEST_CASE("strip_comments leaves string literals alone") {
    std::string s = "string s = \"//not a comment\";";
    CHECK(strip_comments(s) == s);
    std::string t = "string t = \"/* keep */\";";
    CHECK(strip_comments(t) == t);
    std::string u = "bytes1 c = '/'; string v = '// nope';";
    CHECK(strip_comments(u) == u);
}

TEST_CASE("block comments do not nest") {
    // The first */ closes, so the trailing text is code again.
    CHECK(strip_comments("a /* x /* y */ b") == "a  b");
}

TEST_CASE("multi-line block comments keep surrounding code lines apart") {
    CHECK(strip_comments("uint a; /* c1\nc2 */ uint b;") == "uint a; \n uint b;");
    CHECK(strip_comments("uint a;\n/* alone */\nuint b;") == "uint a;\nuint b;");
}

TEST_CASE("strip_comments reports unterminated constructs with line numbers") {
    CHECK_THROWS_AS(strip_comments("uint a;\n/* open"), Error);
    try {
        strip_comments("uint a;\n/* open");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unterminated_block_comment);
        CHECK(e.line() == 2);
    }
    try {
        strip_comments("uint a;\nstring s = \"broken\nuint b;");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unterminated_string);
        CHECK(e.line() == 2);
    }
    try {
        strip_comments("string s = \"eof");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unterminated_string);
        CHECK(e.line() == 1);
    }
}

TEST_CASE("collapse_blank_lines squeezes runs and trailing whitespace") {
    CHECK(collapse_blank_lines("a\n\n\n\nb") == "a\n\nb\n");
    CHECK(collapse_blank_lines("") == "");
    CHECK(collapse_blank_lines("a  \nb") == "a\nb\n");
    CHECK(collapse_blank_lines("a") == "a\n");
    CHECK(collapse_blank_lines("a\r\nb\r\n") == "a\nb\n");
}

TEST_CASE("cleaning is idempotent over the fixture corpus") {
    namespace fs = std::filesystem;
    int files = 0;
    for (const auto& entry : fs::directory_iterator(testutil::fixture("sol"))) {
        std::string raw = read_file(entry.path().string());
        std::string stripped = strip_comments(raw);
        CHECK(strip_comments(stripped) == stripped);
        std::string collapsed = collapse_blank_lines(stripped);
        CHECK(collapse_blank_lines(collapsed) == collapsed);
        ++files;
    }
    CHECK(files == 20);
}

TEST_CASE("cleaning preserves the lexical token stream") {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(testutil::fixture("sol"))) {
        std::string raw = read_file(entry.path().string());
        INFO(entry.path().filename().string());
        CHECK(testutil::lex_solidity(raw) == testutil::lex_solidity(clean_source(raw)));
    }
}
