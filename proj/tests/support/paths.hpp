#pragma once

#include <string>

namespace testutil {

inline std::string source_dir() { return SOLAUDIT_SOURCE_DIR; }
inline std::string fixture(const std::string& rel) {
    return source_dir() + "/tests/fixtures/" + rel;
}
inline std::string bpe_data_dir() { return source_dir() + "/data/gpt2"; }

}  // namespace testutil
