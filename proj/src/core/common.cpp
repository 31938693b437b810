#include "core/common.hpp"

#include <algorithm>

namespace bothp {

std::vector<int> Rng::sample(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("Rng::sample: need 0 <= k <= n");
  std::vector<int> pool(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int64_t j = i + below(static_cast<int64_t>(n - i));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace bothp
