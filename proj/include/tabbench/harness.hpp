#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tabbench/optimizer.hpp"
#include "tabbench/stats.hpp"
#include "tabbench/table.hpp"

namespace tabbench {

// Whether an observation may become the incumbent at any fidelity or only
// when evaluated at the table's full epoch budget.
enum class IncumbentMode { any_budget, max_budget_only };

struct TraceStep {
  uint64_t config = 0;
  int budget_epochs = 0;
  double valid_mse = 0.0;
  double charged_seconds = 0.0;  // cost of this evaluation alone
  double clock_seconds = 0.0;    // simulated wall-clock after this evaluation
  bool has_incumbent = false;
  uint64_t incumbent_config = 0;
  double incumbent_valid = std::numeric_limits<double>::infinity();
  double regret = 0.0;  // incumbent's mean test MSE minus the table optimum
};

struct RunTrace {
  std::string strategy;
  uint64_t seed = 0;
  double initial_regret = 0.0;  // regret before any observation (worst case)
  std::vector<TraceStep> steps;
  std::string error;  // non-empty if the strategy raised; steps hold the partial run

  double final_regret() const { return steps.empty() ? initial_regret : steps.back().regret; }
  double final_clock() const { return steps.empty() ? 0.0 : steps.back().clock_seconds; }

  // Regret as a right-continuous step function of the simulated clock.
  double regret_at(double t) const;
};

struct RunLimits {
  int max_evals = 0;         // 0 = no cap
  double max_seconds = 0.0;  // 0 = no cap; at least one cap must be set
  IncumbentMode incumbent = IncumbentMode::any_budget;
};

// Spread of the mean-test column: the regret of knowing nothing.
double initial_regret(const BenchTable& table);

// Runs one strategy against the table until a cap is hit or the strategy
// reports it is finished. Determinism: the same (table, strategy, seed,
// limits, options) always yields the same trace.
RunTrace run_once(const BenchTable& table, Strategy strategy, uint64_t seed,
                  const RunLimits& limits, const OptimizerOptions& options = {});

// Seed for run `run_index` of `s` under a common master seed.
uint64_t run_seed(uint64_t master_seed, Strategy s, int run_index);

// n log-spaced points from t_min to t_max inclusive; t_min must be positive.
std::vector<double> log_time_grid(double t_min, double t_max, int n);

struct AggregateCurve {
  std::string strategy;
  std::vector<double> time;
  std::vector<double> q25, median, q75;  // nearest-rank quantiles of regret
};

AggregateCurve aggregate_regret(const std::string& label, const std::vector<const RunTrace*>& runs,
                                const std::vector<double>& grid);

Ecdf final_regret_ecdf(const std::vector<const RunTrace*>& runs);

struct CompareOptions {
  std::vector<Strategy> strategies;
  int runs_per_strategy = 16;
  uint64_t master_seed = 0;
  RunLimits limits;
  OptimizerOptions optimizer;
  int grid_points = 128;
};

struct CompareResult {
  std::vector<std::string> strategy_names;
  std::vector<std::vector<RunTrace>> traces;  // [strategy][run]
  std::vector<double> grid;                   // shared time grid (may be empty)
  std::vector<AggregateCurve> curves;         // one per strategy
  double initial_regret = 0.0;
};

CompareResult compare(const BenchTable& table, const CompareOptions& options);

// Writes traces.csv, curves.csv, ecdf.csv, meta.json, curves.svg and
// ecdf.svg into `dir` (created if missing). CSV bytes are stable across
// platforms: doubles are printed as shortest round-trip decimals.
void write_compare_bundle(const std::string& dir, const BenchTable& table,
                          const CompareOptions& options, const CompareResult& result);

}  // namespace tabbench
