#pragma once

// Self-contained significance tests used by the test suite only. Both are
// deliberately independent of the library's own statistics code so they can
// act as referees for it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace statcheck {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// One-sided Mann-Whitney: p-value for the alternative "xs tend to be
// smaller than ys". Normal approximation with tie correction and a
// continuity correction; fine for the sample sizes used here (>= 20).
inline double mann_whitney_p_less(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t nx = xs.size(), ny = ys.size();
  const size_t n = nx + ny;
  std::vector<std::pair<double, int>> all;  // value, side (0 = x, 1 = y)
  all.reserve(n);
  for (double v : xs) all.emplace_back(v, 0);
  for (double v : ys) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum_x = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k) {
      if (all[k].second == 0) rank_sum_x += avg_rank;
    }
    tie_term += t * t * t - t;
    i = j;
  }

  const double u = rank_sum_x - static_cast<double>(nx) * (static_cast<double>(nx) + 1.0) / 2.0;
  const double mean_u = static_cast<double>(nx) * static_cast<double>(ny) / 2.0;
  const double nn = static_cast<double>(n);
  const double var_u = static_cast<double>(nx) * static_cast<double>(ny) / 12.0 *
                       ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var_u <= 0.0) return 0.5;  // everything tied: no evidence either way
  const double z = (u - mean_u + 0.5) / std::sqrt(var_u);
  return normal_cdf(z);
}

// One-sided two-sample Kolmogorov-Smirnov: p-value for the alternative
// "xs are stochastically smaller than ys" (the ECDF of xs lies above, i.e.
// the distribution lies to the left). Asymptotic p = exp(-2 m n D+^2 / (m+n)).
inline double ks_p_left(std::vector<double> xs, std::vector<double> ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double m = static_cast<double>(xs.size());
  const double n = static_cast<double>(ys.size());
  double d_plus = 0.0;
  size_t ix = 0, iy = 0;
  while (ix < xs.size() || iy < ys.size()) {
    const double t = ix < xs.size() && (iy >= ys.size() || xs[ix] <= ys[iy]) ? xs[ix] : ys[iy];
    while (ix < xs.size() && xs[ix] <= t) ++ix;
    while (iy < ys.size() && ys[iy] <= t) ++iy;
    const double fx = static_cast<double>(ix) / m;
    const double fy = static_cast<double>(iy) / n;
    d_plus = std::max(d_plus, fx - fy);
  }
  if (d_plus <= 0.0) return 1.0;
  return std::exp(-2.0 * d_plus * d_plus * m * n / (m + n));
}

}  // namespace statcheck
