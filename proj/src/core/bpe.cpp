#include "core/bpe.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>

#include "json.hpp"

#include "core/error.hpp"
#include "core/sha256.hpp"
#include "core/unicode.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

// The GPT-2 byte-to-unicode table: printable latin bytes map to themselves,
// everything else is shifted into 0x100+.
void build_byte_symbols(std::string out[256]) {
    auto encode_cp = [](uint32_t cp) {
        std::string s;
        if (cp < 0x80) {
            s.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        return s;
    };
    auto directly_mapped = [](int b) {
        return (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    int shift = 0;
    for (int b = 0; b < 256; ++b) {
        if (directly_mapped(b)) {
            out[b] = encode_cp(static_cast<uint32_t>(b));
        } else {
            out[b] = encode_cp(static_cast<uint32_t>(256 + shift));
            ++shift;
        }
    }
}

void verify_checksums(const std::string& dir, const std::string& vocab_path,
                      const std::string& merges_path) {
    std::string sums_path = dir + "/SHA256SUMS";
    if (!std::filesystem::exists(sums_path)) return;
    for (const std::string& line : split(read_file(sums_path), '\n')) {
        if (line.empty()) continue;
        size_t gap = line.find("  ");
        if (gap == std::string::npos || gap != 64) {
            raise(Errc::config, "malformed checksum line in " + sums_path);
        }
        std::string expected = line.substr(0, 64);
        std::string name = line.substr(gap + 2);
        std::string path;
        if (name == std::filesystem::path(vocab_path).filename()) path = vocab_path;
        else if (name == std::filesystem::path(merges_path).filename()) path = merges_path;
        else continue;
        std::string actual = sha256_hex(read_file(path));
        if (actual != expected) {
            raise(Errc::config, "checksum mismatch for " + path + ": expected " + expected +
                                    ", got " + actual);
        }
    }
}

enum class CharClass { letter, number, whitespace, other };

CharClass classify(uint32_t cp, bool valid_utf8) {
    if (!valid_utf8) return CharClass::other;
    if (is_whitespace(cp)) return CharClass::whitespace;
    if (is_letter(cp)) return CharClass::letter;
    if (is_number(cp)) return CharClass::number;
    return CharClass::other;
}

}  // namespace

std::shared_ptr<Gpt2Bpe> Gpt2Bpe::load(const std::string& vocab_path,
                                       const std::string& merges_path) {
    std::string dir = std::filesystem::path(vocab_path).parent_path().string();
    if (dir.empty()) dir = ".";
    verify_checksums(dir, vocab_path, merges_path);

    auto bpe = std::shared_ptr<Gpt2Bpe>(new Gpt2Bpe());
    build_byte_symbols(bpe->byte_symbols_);

    nlohmann::json vocab_json;
    try {
        vocab_json = nlohmann::json::parse(read_file(vocab_path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "bad vocab file " + vocab_path + ": " + e.what());
    }
    for (auto it = vocab_json.begin(); it != vocab_json.end(); ++it) {
        bpe->vocab_[it.key()] = it.value().get<int>();
    }
    for (int b = 0; b < 256; ++b) {
        if (!bpe->vocab_.count(bpe->byte_symbols_[b])) {
            raise(Errc::config, "vocab is missing base byte symbol for byte " + std::to_string(b));
        }
    }

    std::string merges_text = read_file(merges_path);
    int rank = 0;
    bool first = true;
    for (const std::string& line : split(merges_text, '\n')) {
        if (first) {  // "#version: ..." header
            first = false;
            if (line.rfind("#version", 0) == 0) continue;
        }
        if (line.empty()) continue;
        size_t gap = line.find(' ');
        if (gap == std::string::npos || gap == 0 || gap + 1 >= line.size()) {
            raise(Errc::config, "bad merges line " + std::to_string(rank + 2) + " in " + merges_path);
        }
        std::string left = line.substr(0, gap);
        std::string right = line.substr(gap + 1);
        if (!bpe->vocab_.count(left + right)) {
            raise(Errc::config, "merge product missing from vocab: " + left + right);
        }
        bpe->merge_ranks_.emplace(left + '\x01' + right, rank++);
    }
    return bpe;
}

std::shared_ptr<Gpt2Bpe> Gpt2Bpe::load_dir(const std::string& data_dir) {
    return load(data_dir + "/vocab.json", data_dir + "/merges.txt");
}

std::vector<std::string> Gpt2Bpe::split_pieces(std::string_view text) const {
    std::vector<std::string> pieces;
    size_t i = 0;
    const size_t n = text.size();

    struct Char {
        uint32_t cp;
        size_t len;
        CharClass cls;
    };
    auto at = [&](size_t pos) -> Char {
        DecodedChar d = decode_utf8(text, pos);
        return {d.codepoint, d.length, classify(d.codepoint, d.valid)};
    };
    auto take_run = [&](size_t start, CharClass cls) {
        size_t end = start;
        while (end < n) {
            Char c = at(end);
            if (c.cls != cls) break;
            end += c.len;
        }
        return end;
    };
    // Contraction suffixes tried at an apostrophe, longest first. Lowercase
    // only, matching the reference pattern exactly.
    static constexpr std::string_view kContractions[] = {"'re", "'ve", "'ll",
                                                         "'s",  "'t",  "'m", "'d"};

    while (i < n) {
        Char c = at(i);

        if (c.cp == '\'' && c.cls == CharClass::other) {
            bool matched = false;
            for (std::string_view suffix : kContractions) {
                if (text.substr(i, suffix.size()) == suffix) {
                    pieces.emplace_back(suffix);
                    i += suffix.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }

        if (c.cls == CharClass::whitespace) {
            size_t run_end = take_run(i, CharClass::whitespace);
            if (run_end == n) {  // \s+ at end of input
                pieces.emplace_back(text.substr(i, run_end - i));
                i = run_end;
                continue;
            }
            // \s+(?!\S): all but the last whitespace char forms one piece.
            Char last = at(i);
            size_t last_pos = i;
            for (size_t p = i; p < run_end;) {
                last = at(p);
                last_pos = p;
                p += last.len;
            }
            if (last_pos > i) {
                pieces.emplace_back(text.substr(i, last_pos - i));
            }
            if (last.cp == ' ') {
                // The optional leading space of the next word piece.
                size_t next_pos = last_pos + 1;
                Char next = at(next_pos);
                size_t end;
                if (next.cp == '\'' && next.cls == CharClass::other) {
                    // A space never joins a contraction; it heads an
                    // other-class piece instead.
                    end = take_run(next_pos, CharClass::other);
                } else {
                    end = take_run(next_pos, next.cls);
                }
                pieces.emplace_back(text.substr(last_pos, end - last_pos));
                i = end;
            } else {
                pieces.emplace_back(text.substr(last_pos, last.len));
                i = last_pos + last.len;
            }
            continue;
        }

        size_t end = take_run(i, c.cls);
        pieces.emplace_back(text.substr(i, end - i));
        i = end;
    }
    return pieces;
}

void Gpt2Bpe::bpe_piece(std::string_view piece, std::vector<int>& out) const {
    std::string key(piece);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            out.insert(out.end(), it->second.begin(), it->second.end());
            return;
        }
    }

    std::vector<std::string> word;
    word.reserve(piece.size());
    for (unsigned char b : piece) {
        word.push_back(byte_symbols_[b]);
    }

    while (word.size() >= 2) {
        int best_rank = std::numeric_limits<int>::max();
        size_t best_pos = 0;
        for (size_t j = 0; j + 1 < word.size(); ++j) {
            auto it = merge_ranks_.find(word[j] + '\x01' + word[j + 1]);
            if (it != merge_ranks_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_pos = j;
            }
        }
        if (best_rank == std::numeric_limits<int>::max()) break;

        // Merge every occurrence of the winning pair, left to right.
        const std::string left = word[best_pos];
        const std::string right = word[best_pos + 1];
        std::vector<std::string> merged;
        merged.reserve(word.size());
        for (size_t j = 0; j < word.size();) {
            if (j + 1 < word.size() && word[j] == left && word[j + 1] == right) {
                merged.push_back(left + right);
                j += 2;
            } else {
                merged.push_back(std::move(word[j]));
                j += 1;
            }
        }
        word = std::move(merged);
    }

    std::vector<int> ids;
    ids.reserve(word.size());
    for (const std::string& symbol : word) {
        auto it = vocab_.find(symbol);
        if (it == vocab_.end()) {
            raise(Errc::internal, "merged symbol missing from vocab: " + symbol);
        }
        ids.push_back(it->second);
    }
    out.insert(out.end(), ids.begin(), ids.end());
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(std::move(key), std::move(ids));
}

std::vector<int> Gpt2Bpe::encode(std::string_view text) const {
    std::vector<int> out;
    for (const std::string& piece : split_pieces(text)) {
        bpe_piece(piece, out);
    }
    return out;
}

size_t Gpt2Bpe::count(std::string_view text) const {
    return encode(text).size();
}

}  // namespace solaudit
