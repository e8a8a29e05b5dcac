#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tabbench/rng.hpp"
#include "tabbench/space.hpp"

namespace tabbench {

struct KdeOptions {
  // Bandwidth floor; keeps the kernel mass from collapsing onto one value.
  double min_bandwidth = 0.3;
  int cv_grid = 7;        // bandwidth candidates per dimension
  int cv_max_points = 96; // leave-one-out subsample cap (strided, deterministic)
  int cv_passes = 2;      // coordinate-descent sweeps over dimensions
};

// Product kernel density over grid positions: Aitchison-Aitken kernels on
// categorical dimensions and Wang-van Ryzin kernels on ordinal ones, each
// renormalized over the finite support so densities sum to 1 over the grid.
// Bandwidths maximize the leave-one-out log-likelihood by per-dimension
// coordinate search over a fixed candidate grid.
class GridKde {
 public:
  static GridKde fit(const ConfigSpace& space, std::vector<std::vector<int>> samples,
                     const KdeOptions& options = {});

  double density(std::span<const int> x) const;
  double log_density(std::span<const int> x) const;

  // Picks a stored sample as kernel center, then draws every dimension from
  // that center's kernel column with the bandwidth widened by the factor.
  std::vector<int> sample(Rng& rng, double bandwidth_factor) const;

  const std::vector<double>& bandwidths() const { return lambda_; }
  size_t n_samples() const { return samples_.size(); }

 private:
  std::vector<int> cards_;
  std::vector<ParamKind> kinds_;
  std::vector<std::vector<int>> samples_;
  std::vector<double> lambda_;
  double min_bandwidth_ = 0.3;
  std::vector<std::vector<double>> kmat_;  // per dim, card*card: [value * card + center]
};

// Independent per-dimension density (the classic tree-structured estimator
// uses one of these per side). Bandwidths come from the same leave-one-out
// criterion computed on per-dimension value histograms.
class UnivariateKde {
 public:
  static UnivariateKde fit(const ConfigSpace& space, const std::vector<std::vector<int>>& samples,
                           const KdeOptions& options = {});

  double density(std::span<const int> x) const;
  double log_density(std::span<const int> x) const;

  // Per-dimension draw from the fitted marginal (no widening).
  std::vector<int> sample(Rng& rng) const;

  const std::vector<double>& bandwidths() const { return lambda_; }

 private:
  std::vector<int> cards_;
  std::vector<std::vector<double>> dens_;  // per dim, over values; sums to 1
  std::vector<double> lambda_;
};

// Candidate scheme shared by the model-based samplers: draw candidates from
// the good-side model, score by density ratio good/bad, keep the best (ties
// go to the earliest draw). Returns the winning config index.
uint64_t acquisition_argmax(const ConfigSpace& space, const GridKde& good, const GridKde& bad,
                            int n_candidates, double bandwidth_factor, Rng& rng);
uint64_t acquisition_argmax(const ConfigSpace& space, const UnivariateKde& good,
                            const UnivariateKde& bad, int n_candidates, Rng& rng);

}  // namespace tabbench
