#pragma once

#include <cstdint>
#include <vector>

namespace solaudit {

// Deterministic generator with a fully specified algorithm (splitmix64), so
// seeded runs produce identical streams on every platform and toolchain.
// std::shuffle / std::uniform_int_distribution are implementation-defined and
// must not be used anywhere a seed is recorded into a run artifact.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound) via rejection sampling. bound must be > 0.
    uint64_t below(uint64_t bound) {
        uint64_t threshold = (0ULL - bound) % bound;
        while (true) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    double unit_double() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Derives an independent child stream; used to give each work item its
    // own generator regardless of processing order.
    Rng fork() { return Rng(next_u64()); }

    template <typename T>
    void shuffle(std::vector<T>& items) {  // Fisher-Yates
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // First k elements of a shuffled index range [0, n).
    std::vector<size_t> sample_indices(size_t n, size_t k);

private:
    uint64_t state_;
};

}  // namespace solaudit
