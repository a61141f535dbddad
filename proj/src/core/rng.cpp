#include "core/rng.hpp"

#include <numeric>

namespace solaudit {

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    if (k > n) k = n;
    // Partial Fisher-Yates: only the first k positions need settling.
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace solaudit
