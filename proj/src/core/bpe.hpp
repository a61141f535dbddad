#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace solaudit {

// Byte-level BPE encoder compatible with the GPT-2 tokenizer file format
// (vocab.json + merges.txt). Splitting follows the GPT-2 pre-tokenizer
// pattern:
//   's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
// Every byte sequence is encodable: bytes map through the 256-entry
// byte-to-unicode table before merging, and invalid UTF-8 degrades to
// single-byte "other" characters during splitting.
class Gpt2Bpe {
public:
    // Loads the two data files. When a SHA256SUMS file sits next to them it
    // is checked first, so a silently modified vocabulary cannot shift token
    // counts between runs.
    static std::shared_ptr<Gpt2Bpe> load(const std::string& vocab_path,
                                         const std::string& merges_path);
    static std::shared_ptr<Gpt2Bpe> load_dir(const std::string& data_dir);

    std::vector<int> encode(std::string_view text) const;
    size_t count(std::string_view text) const;

    size_t vocab_size() const { return vocab_.size(); }

    // Exposed for tests: the piece boundaries produced by the split pattern.
    std::vector<std::string> split_pieces(std::string_view text) const;

private:
    Gpt2Bpe() = default;
    void bpe_piece(std::string_view piece, std::vector<int>& out) const;

    std::unordered_map<std::string, int> vocab_;
    std::unordered_map<std::string, int> merge_ranks_;  // "left\x01right" -> rank
    std::string byte_symbols_[256];                     // byte -> mapped char (UTF-8)

    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, std::vector<int>> cache_;
};

}  // namespace solaudit
