#pragma once

#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "tabbench/table.hpp"

namespace tabbench {

struct FanovaComponent {
  std::vector<int> dims;  // ascending parameter indices
  double variance = 0.0;
  double fraction = 0.0;
};

struct Decomposition {
  double total_variance = 0.0;
  bool zero_variance = false;
  // All non-empty subsets up to the requested order, by size then
  // lexicographically.
  std::vector<FanovaComponent> components;

  const FanovaComponent* find(std::span<const int> dims) const;
};

// Exact functional ANOVA of a complete grid. y holds one value per cell in
// mixed-radix order (first dimension most significant). When `percentile`
// is set, values are clamped from above at that nearest-rank quantile
// before decomposing; the grid stays complete and balanced.
Decomposition fanova_exact(std::span<const double> y, std::span<const int> cards, int max_order,
                           std::optional<double> percentile = std::nullopt);

// Same on a table's per-config seed means; train/valid use the final epoch.
Decomposition fanova_exact(const BenchTable& table, Metric metric, int max_order,
                           std::optional<double> percentile = std::nullopt);

struct ImportanceReport {
  std::vector<std::pair<int, double>> unary;             // (dim, fraction), descending
  std::vector<std::tuple<int, int, double>> pairwise;    // (dim, dim, fraction), top k descending
};

ImportanceReport importance_report(const Decomposition& d, int top_k_pairs);

}  // namespace tabbench
