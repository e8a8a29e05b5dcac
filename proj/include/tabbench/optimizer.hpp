#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabbench/kde.hpp"
#include "tabbench/rng.hpp"
#include "tabbench/space.hpp"

namespace tabbench {

struct Suggestion {
  uint64_t config = 0;
  int budget_epochs = 0;
};

struct Observation {
  uint64_t config = 0;
  int budget_epochs = 0;
  double valid_mse = 0.0;
  double runtime_charged_seconds = 0.0;
};

enum class Strategy { rs, tpe, bohb, rf, re, hb, rl };

// Accepts the canonical short names (rs, tpe, bohb, rf, re, hb, rl) plus
// the spelled-out aliases random, forest, evolution, hyperband, reinforce.
Strategy strategy_from_name(const std::string& name);
const char* strategy_name(Strategy s);

struct OptimizerOptions {
  // successive-halving family
  double hb_eta = 3.0;
  int hb_min_budget = 4;
  int hb_max_budget = 0;       // 0: the table's max epochs
  int hb_bracket_limit = 125;  // finished() after this many bracket executions

  // density-ratio samplers
  double bohb_gamma = 0.15;
  double bohb_min_bandwidth = 0.3;
  double bohb_bandwidth_factor = 3.0;
  int bohb_candidates = 64;
  double bohb_random_fraction = 1.0 / 3.0;
  double tpe_gamma = 0.25;
  int tpe_candidates = 24;

  // forest-guided
  int rf_trees = 10;
  int rf_max_evals_per_config = 4;
  int rf_random_interval = 3;  // every rf_random_interval-th suggestion is uniform
  int rf_local_starts = 10;

  // evolution
  int re_population = 100;
  int re_tournament = 10;

  // policy gradient
  double rl_learning_rate = 0.1;
  double rl_baseline_momentum = 0.9;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual Suggestion suggest() = 0;
  virtual void observe(const Observation& obs) = 0;
  virtual bool finished() const { return false; }
};

std::unique_ptr<Optimizer> make_optimizer(Strategy s, const ConfigSpace& space, int max_epochs,
                                          const OptimizerOptions& options, uint64_t seed);

struct Rung {
  int n_configs = 0;
  int budget = 0;
};

// Geometric budget ladder: b_max * eta^-(s_max - i) rounded to the nearest
// integer (at least 1), where s_max = floor(log_eta(b_max / b_min)).
std::vector<int> hb_budgets(double eta, int b_min, int b_max);

// Successive-halving brackets over that ladder, widest exploration first.
std::vector<std::vector<Rung>> hb_schedule(double eta, int b_min, int b_max);

// Good/bad density pair for the multivariate sampler, split at gamma with
// at least d+2 points per side. Empty when fewer than 2*(d+2) points exist.
struct DensityPair {
  GridKde good;
  GridKde bad;
};
std::optional<DensityPair> bohb_model_fit(
    const ConfigSpace& space, const std::vector<std::pair<double, std::vector<int>>>& history,
    double gamma, const KdeOptions& kde_options);

// Hill climb over one-position neighborhoods with strictly increasing
// acquisition; returns the local argmax. The optional path records every
// accepted config including the start.
uint64_t local_search_max(const ConfigSpace& space, const std::function<double(uint64_t)>& acq,
                          uint64_t start, std::vector<uint64_t>* path = nullptr);

}  // namespace tabbench
