#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace solaudit {

// Incremental SHA-256. Used for request fingerprints, run-manifest content
// hashes, and data-file checksum pinning.
class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    // Finalizes and returns the lowercase hex digest. The object must not be
    // updated afterwards.
    std::string hex_digest();

private:
    void process_block(const uint8_t* block);

    uint32_t state_[8];
    uint64_t total_len_ = 0;
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);

}  // namespace solaudit
