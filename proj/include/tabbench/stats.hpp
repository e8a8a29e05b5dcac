#pragma once

#include <span>
#include <vector>

namespace tabbench {

// Right-continuous empirical CDF: F(x) = #{samples <= x} / n.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);

  double eval(double x) const;
  const std::vector<double>& sorted_samples() const { return sorted_; }
  size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

// Ranks 1..n with ties averaged (fractional ranks).
std::vector<double> fractional_ranks(std::span<const double> xs);

double pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of fractional ranks. Throws std::domain_error when a
// side has zero rank variance (all values tied) or fewer than 2 points.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Nearest-rank quantile: the ceil(p*n)-th smallest sample (1-based),
// p in (0, 1]. Does not interpolate.
double quantile_nearest_rank(std::span<const double> xs, double p);

double mean_of(std::span<const double> xs);
double population_variance(std::span<const double> xs);
double population_std(std::span<const double> xs);

}  // namespace tabbench
