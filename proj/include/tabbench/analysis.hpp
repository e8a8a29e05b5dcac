#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabbench/table.hpp"

namespace tabbench {

// Population std of the validation loss across a config's seed records at
// one epoch (1-based).
double noise_std(const BenchTable& table, uint64_t config, int epoch);

// Same across the final test losses (no epoch axis).
double noise_std_test(const BenchTable& table, uint64_t config);

struct RankCorrResult {
  std::vector<int> budgets;
  std::vector<double> top_fracs;
  // rho[f][b]: Spearman correlation between mean validation loss at
  // budgets[b] and at the maximum budget, over the top fraction
  // top_fracs[f] of configs.
  std::vector<std::vector<double>> rho;
};

// Top fractions are selected by mean final *test* loss by default (selection
// by what a practitioner ultimately cares about); selection == Metric::valid
// selects by mean validation loss at the final epoch instead.
RankCorrResult rank_corr_budgets(const BenchTable& table, std::span<const int> budgets,
                                 std::span<const double> top_fracs,
                                 Metric selection = Metric::test);

struct NeighborChange {
  int param = 0;
  int old_pos = 0;
  int new_pos = 0;
  uint64_t config = 0;
  double mean_test = 0.0;
  double relative_change = 0.0;  // (neighbor - base) / base
};

struct NeighborhoodReport {
  uint64_t base_config = 0;
  double base_mean_test = 0.0;
  std::vector<NeighborChange> changes;  // ascending by relative change
};

NeighborhoodReport local_neighborhood(const BenchTable& table, uint64_t config);

// Pairwise rank agreement between datasets sharing one space. Entry (a, b)
// averages the Spearman correlation over a's top set and over b's top set,
// where each top set is the best `top_frac` of configs by mean test loss
// on that dataset. Diagonal is 1.
std::vector<std::vector<double>> cross_dataset_rank_corr(
    std::span<const BenchTable* const> tables, double top_frac);

}  // namespace tabbench
