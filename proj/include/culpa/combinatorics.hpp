#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace culpa {

// Visits every k-subset of {0..n-1} in lexicographic order. The visitor
// returns true to stop early; the function reports whether it stopped.
template <typename Visitor>
bool for_each_combination(std::size_t n, std::size_t k, Visitor&& visit) {
  if (k > n) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (visit(static_cast<const std::vector<std::size_t>&>(idx))) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Subsets by size, then lexicographically.
template <typename Visitor>
bool for_each_subset_by_size(std::size_t n, std::size_t max_size, Visitor&& visit) {
  for (std::size_t k = 0; k <= std::min(n, max_size); ++k)
    if (for_each_combination(n, k, visit)) return true;
  return false;
}

// Visits every assignment in the product of `sizes`, first position most
// significant (lexicographic order).
template <typename Visitor>
bool for_each_assignment(const std::vector<std::size_t>& sizes, Visitor&& visit) {
  std::vector<int> cur(sizes.size(), 0);
  for (auto s : sizes)
    if (s == 0) return false;
  while (true) {
    if (visit(static_cast<const std::vector<int>&>(cur))) return true;
    std::size_t i = sizes.size();
    while (i > 0) {
      if (++cur[i - 1] < static_cast<int>(sizes[i - 1])) break;
      cur[i - 1] = 0;
      --i;
    }
    if (i == 0) return false;
  }
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace culpa
