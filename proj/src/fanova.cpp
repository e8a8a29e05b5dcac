#include "tabbench/fanova.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "tabbench/stats.hpp"

namespace tabbench {

const FanovaComponent* Decomposition::find(std::span<const int> dims) const {
  for (const auto& c : components) {
    if (c.dims.size() == dims.size() && std::equal(c.dims.begin(), c.dims.end(), dims.begin()))
      return &c;
  }
  return nullptr;
}

namespace {

// Next size-k combination of {0..d-1} in lexicographic order; false when done.
bool next_combination(std::vector<int>& dims, int d) {
  const int k = static_cast<int>(dims.size());
  int i = k - 1;
  while (i >= 0 && dims[i] == d - k + i) --i;
  if (i < 0) return false;
  ++dims[i];
  for (int j = i + 1; j < k; ++j) dims[j] = dims[j - 1] + 1;
  return true;
}

}  // namespace

Decomposition fanova_exact(std::span<const double> y, std::span<const int> cards, int max_order,
                           std::optional<double> percentile) {
  const int d = static_cast<int>(cards.size());
  if (d < 1) throw std::domain_error("fanova needs at least one dimension");
  if (d > 62) throw std::domain_error("fanova supports at most 62 dimensions");
  if (max_order < 1 || max_order > d)
    throw std::domain_error("max_order must be in [1, " + std::to_string(d) + "]");
  uint64_t n = 1;
  for (int c : cards) {
    if (c < 1) throw std::domain_error("cardinalities must be positive");
    n *= static_cast<uint64_t>(c);
  }
  if (y.size() != n)
    throw std::domain_error("grid has " + std::to_string(y.size()) + " values, expected " +
                            std::to_string(n));
  for (double v : y) {
    if (!std::isfinite(v)) throw std::domain_error("grid value is not finite");
  }

  std::vector<double> yy(y.begin(), y.end());
  if (percentile) {
    const double q = quantile_nearest_rank(yy, *percentile);
    for (double& v : yy) v = std::min(v, q);
  }

  Decomposition out;
  out.total_variance = population_variance(yy);
  out.zero_variance = out.total_variance == 0.0;

  std::vector<uint64_t> stride(static_cast<size_t>(d));
  stride[static_cast<size_t>(d) - 1] = 1;
  for (int i = d - 2; i >= 0; --i)
    stride[static_cast<size_t>(i)] =
        stride[static_cast<size_t>(i) + 1] * static_cast<uint64_t>(cards[static_cast<size_t>(i) + 1]);

  // Centered components f_U keyed by dimension bitmask; f_empty is the mean.
  std::unordered_map<uint64_t, std::vector<double>> comp;
  comp.emplace(0, std::vector<double>{mean_of(yy)});

  for (int order = 1; order <= max_order; ++order) {
    std::vector<int> dims(static_cast<size_t>(order));
    for (int i = 0; i < order; ++i) dims[static_cast<size_t>(i)] = i;
    do {
      uint64_t tcount = 1;
      for (int i : dims) tcount *= static_cast<uint64_t>(cards[static_cast<size_t>(i)]);

      // Marginal means over the cells sharing each U-tuple.
      std::vector<double> f(tcount, 0.0);
      for (uint64_t cell = 0; cell < n; ++cell) {
        uint64_t t = 0;
        for (int i : dims)
          t = t * static_cast<uint64_t>(cards[static_cast<size_t>(i)]) +
              (cell / stride[static_cast<size_t>(i)]) % static_cast<uint64_t>(cards[static_cast<size_t>(i)]);
        f[t] += yy[cell];
      }
      const double per_tuple = static_cast<double>(n) / static_cast<double>(tcount);
      for (double& v : f) v /= per_tuple;

      // Subtract every lower-order component restricted to this subset.
      uint64_t mask = 0;
      for (int i : dims) mask |= uint64_t{1} << i;
      std::vector<int> tpos(static_cast<size_t>(order));
      for (uint64_t t = 0; t < tcount; ++t) {
        uint64_t rest = t;
        for (int i = order - 1; i >= 0; --i) {
          const auto c = static_cast<uint64_t>(cards[static_cast<size_t>(dims[static_cast<size_t>(i)])]);
          tpos[static_cast<size_t>(i)] = static_cast<int>(rest % c);
          rest /= c;
        }
        double lower = 0.0;
        uint64_t sub = (mask - 1) & mask;
        while (true) {
          uint64_t idx = 0;
          for (int i = 0; i < order; ++i) {
            const int dim = dims[static_cast<size_t>(i)];
            if (sub & (uint64_t{1} << dim))
              idx = idx * static_cast<uint64_t>(cards[static_cast<size_t>(dim)]) +
                    static_cast<uint64_t>(tpos[static_cast<size_t>(i)]);
          }
          lower += comp.at(sub)[idx];
          if (sub == 0) break;
          sub = (sub - 1) & mask;
        }
        f[t] -= lower;
      }

      double vu = 0.0;
      for (double v : f) vu += v * v;
      vu /= static_cast<double>(tcount);

      FanovaComponent c;
      c.dims = dims;
      c.variance = vu;
      c.fraction = out.zero_variance ? 0.0 : vu / out.total_variance;
      out.components.push_back(std::move(c));
      comp.emplace(mask, std::move(f));
    } while (next_combination(dims, d));
  }

  return out;
}

Decomposition fanova_exact(const BenchTable& table, Metric metric, int max_order,
                           std::optional<double> percentile) {
  const uint64_t n = table.space().cardinality();
  std::vector<double> y(n);
  for (uint64_t c = 0; c < n; ++c) y[c] = table.mean_metric(c, metric);
  std::vector<int> cards;
  for (const auto& p : table.space().params()) cards.push_back(p.cardinality());
  return fanova_exact(y, cards, max_order, percentile);
}

ImportanceReport importance_report(const Decomposition& d, int top_k_pairs) {
  ImportanceReport rep;
  for (const auto& c : d.components) {
    if (c.dims.size() == 1) rep.unary.emplace_back(c.dims[0], c.fraction);
    if (c.dims.size() == 2) rep.pairwise.emplace_back(c.dims[0], c.dims[1], c.fraction);
  }
  std::stable_sort(rep.unary.begin(), rep.unary.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::stable_sort(rep.pairwise.begin(), rep.pairwise.end(),
                   [](const auto& a, const auto& b) { return std::get<2>(a) > std::get<2>(b); });
  if (top_k_pairs >= 0 && rep.pairwise.size() > static_cast<size_t>(top_k_pairs))
    rep.pairwise.resize(static_cast<size_t>(top_k_pairs));
  return rep;
}

}  // namespace tabbench
