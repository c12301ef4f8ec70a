#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "vstain/metrics.hpp"

namespace vstain {

namespace {

constexpr std::size_t kExactLimit = 12;

// Ranks of |d| with ties averaged, doubled so they stay integral.
std::vector<std::int64_t> doubled_ranks(const std::vector<double>& abs_diffs,
                                        std::vector<std::size_t>& tie_sizes) {
  const std::size_t n = abs_diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return abs_diffs[a] < abs_diffs[b]; });
  std::vector<std::int64_t> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && abs_diffs[order[j + 1]] == abs_diffs[order[i]]) ++j;
    // Average of 1-based ranks i+1..j+1, doubled.
    const auto doubled = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw WilcoxonError("wilcoxon: samples differ in length");
  if (a.size() < 6) throw WilcoxonError("wilcoxon: need at least 6 pairs");
  std::vector<double> abs_diffs;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw WilcoxonError("wilcoxon: non-finite difference");
    if (d == 0.0) continue;
    abs_diffs.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  if (abs_diffs.empty()) throw WilcoxonError("wilcoxon: all differences are zero");

  std::vector<std::size_t> ties;
  const auto ranks = doubled_ranks(abs_diffs, ties);
  const std::size_t n = ranks.size();
  const std::int64_t total = std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0});
  std::int64_t t_plus = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (positive[i]) t_plus += ranks[i];

  if (n <= kExactLimit) {
    // |2T - total| measures distance from the null mean in doubled units.
    const std::int64_t observed = std::abs(2 * t_plus - total);
    std::uint64_t extreme = 0;
    const std::uint64_t assignments = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < assignments; ++mask) {
      std::int64_t t = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) t += ranks[i];
      if (std::abs(2 * t - total) >= observed) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(assignments);
  }

  const double nn = static_cast<double>(n);
  double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  for (std::size_t t : ties) {
    const double tt = static_cast<double>(t);
    variance -= (tt * tt * tt - tt) / 48.0;
  }
  if (!(variance > 0.0)) return 1.0;
  const double mean = nn * (nn + 1.0) / 4.0;
  const double z = (static_cast<double>(t_plus) / 2.0 - mean) / std::sqrt(variance);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace vstain
