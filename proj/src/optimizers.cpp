#include "tabbench/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "tabbench/error.hpp"
#include "tabbench/forest.hpp"

namespace tabbench {

Strategy strategy_from_name(const std::string& name) {
  if (name == "rs" || name == "random") return Strategy::rs;
  if (name == "tpe") return Strategy::tpe;
  if (name == "bohb") return Strategy::bohb;
  if (name == "rf" || name == "forest") return Strategy::rf;
  if (name == "re" || name == "evolution") return Strategy::re;
  if (name == "hb" || name == "hyperband") return Strategy::hb;
  if (name == "rl" || name == "reinforce") return Strategy::rl;
  throw std::domain_error("unknown strategy '" + name +
                          "' (expected rs, tpe, bohb, rf, re, hb or rl)");
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::rs: return "rs";
    case Strategy::tpe: return "tpe";
    case Strategy::bohb: return "bohb";
    case Strategy::rf: return "rf";
    case Strategy::re: return "re";
    case Strategy::hb: return "hb";
    case Strategy::rl: return "rl";
  }
  return "?";
}

std::vector<int> hb_budgets(double eta, int b_min, int b_max) {
  if (!(eta > 1.0)) throw std::domain_error("eta must exceed 1");
  if (b_min < 1 || b_min > b_max) throw std::domain_error("need 1 <= b_min <= b_max");
  const int s_max = static_cast<int>(
      std::floor(std::log(static_cast<double>(b_max) / b_min) / std::log(eta)));
  std::vector<int> budgets;
  for (int i = 0; i <= s_max; ++i) {
    const double b = b_max * std::pow(eta, -static_cast<double>(s_max - i));
    budgets.push_back(std::max(1, static_cast<int>(std::llround(b))));
  }
  return budgets;
}

std::vector<std::vector<Rung>> hb_schedule(double eta, int b_min, int b_max) {
  const auto budgets = hb_budgets(eta, b_min, b_max);
  const int s_max = static_cast<int>(budgets.size()) - 1;
  std::vector<std::vector<Rung>> brackets;
  for (int s = s_max; s >= 0; --s) {
    const int n0 = static_cast<int>(std::ceil(static_cast<double>(s_max + 1) / (s + 1))) *
                   static_cast<int>(std::llround(std::pow(eta, s)));
    std::vector<Rung> rungs;
    int n = n0;
    for (int i = 0; i <= s; ++i) {
      rungs.push_back(Rung{n, budgets[static_cast<size_t>(s_max - s + i)]});
      n = static_cast<int>(std::floor(n / eta));
    }
    brackets.push_back(std::move(rungs));
  }
  return brackets;
}

namespace {

uint64_t uniform_config(const ConfigSpace& space, Rng& rng) {
  return rng.below(space.cardinality());
}

class RandomSearch final : public Optimizer {
 public:
  RandomSearch(const ConfigSpace& space, int max_epochs, uint64_t seed)
      : space_(space), max_epochs_(max_epochs), rng_(seed) {}

  Suggestion suggest() override { return {uniform_config(space_, rng_), max_epochs_}; }
  void observe(const Observation&) override {}

 private:
  ConfigSpace space_;
  int max_epochs_;
  Rng rng_;
};

// Shared successive-halving bracket machinery; subclasses choose how new
// configs enter the widest rung of each bracket.
class ShBase : public Optimizer {
 public:
  ShBase(const ConfigSpace& space, int max_epochs, const OptimizerOptions& options, uint64_t seed)
      : space_(space), options_(options), rng_(seed) {
    const int b_max = options.hb_max_budget > 0 ? options.hb_max_budget : max_epochs;
    if (b_max > max_epochs)
      throw std::domain_error("hb_max_budget exceeds the table's max epochs");
    brackets_ = hb_schedule(options.hb_eta, options.hb_min_budget, b_max);
  }

  bool finished() const override { return completed_brackets_ >= options_.hb_bracket_limit; }

  Suggestion suggest() override {
    if (finished()) throw Error("optimizer has finished its bracket budget");
    if (rung_configs_.empty()) {
      // Start of a bracket: fill the widest rung.
      const auto& bracket = brackets_[bracket_pos_];
      rung_index_ = 0;
      rung_configs_.reserve(static_cast<size_t>(bracket[0].n_configs));
      for (int i = 0; i < bracket[0].n_configs; ++i) rung_configs_.push_back(new_config());
      next_suggest_ = 0;
      rung_results_.clear();
    }
    const int budget = brackets_[bracket_pos_][static_cast<size_t>(rung_index_)].budget;
    return {rung_configs_[next_suggest_++], budget};
  }

  void observe(const Observation& obs) override {
    on_observation(obs);
    rung_results_.emplace_back(obs.valid_mse, obs.config);
    if (rung_results_.size() < rung_configs_.size()) return;

    const auto& bracket = brackets_[bracket_pos_];
    if (rung_index_ + 1 < static_cast<int>(bracket.size())) {
      // Promote the best of this rung; ties go to the lower config index.
      std::sort(rung_results_.begin(), rung_results_.end());
      const int keep = bracket[static_cast<size_t>(rung_index_) + 1].n_configs;
      rung_configs_.clear();
      for (int i = 0; i < keep; ++i) rung_configs_.push_back(rung_results_[static_cast<size_t>(i)].second);
      ++rung_index_;
      next_suggest_ = 0;
      rung_results_.clear();
    } else {
      ++completed_brackets_;
      bracket_pos_ = (bracket_pos_ + 1) % brackets_.size();
      rung_configs_.clear();
      rung_results_.clear();
    }
  }

  int completed_brackets() const { return completed_brackets_; }

 protected:
  virtual uint64_t new_config() = 0;
  virtual void on_observation(const Observation&) {}

  ConfigSpace space_;
  OptimizerOptions options_;
  Rng rng_;

 private:
  std::vector<std::vector<Rung>> brackets_;
  size_t bracket_pos_ = 0;
  int completed_brackets_ = 0;
  int rung_index_ = 0;
  std::vector<uint64_t> rung_configs_;
  size_t next_suggest_ = 0;
  std::vector<std::pair<double, uint64_t>> rung_results_;
};

class Hyperband final : public ShBase {
 public:
  using ShBase::ShBase;

 protected:
  uint64_t new_config() override { return uniform_config(space_, rng_); }
};

class Bohb final : public ShBase {
 public:
  using ShBase::ShBase;

 protected:
  uint64_t new_config() override {
    if (rng_.next_double() >= options_.bohb_random_fraction) {
      if (const DensityPair* model = current_model()) {
        return acquisition_argmax(space_, model->good, model->bad, options_.bohb_candidates,
                                  options_.bohb_bandwidth_factor, rng_);
      }
    }
    return uniform_config(space_, rng_);
  }

  void on_observation(const Observation& obs) override {
    auto& hist = history_[obs.budget_epochs];
    hist.emplace_back(obs.valid_mse, space_.decode(obs.config));
  }

 private:
  // Model at the largest budget holding enough points, refit when that
  // budget gained observations.
  const DensityPair* current_model() {
    const size_t need = 2 * (static_cast<size_t>(space_.num_params()) + 2);
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
      if (it->second.size() < need) continue;
      if (!model_ || model_budget_ != it->first || model_points_ != it->second.size()) {
        KdeOptions kde;
        kde.min_bandwidth = options_.bohb_min_bandwidth;
        model_ = bohb_model_fit(space_, it->second, options_.bohb_gamma, kde);
        model_budget_ = it->first;
        model_points_ = it->second.size();
      }
      return model_ ? &*model_ : nullptr;
    }
    return nullptr;
  }

  std::map<int, std::vector<std::pair<double, std::vector<int>>>> history_;
  std::optional<DensityPair> model_;
  int model_budget_ = -1;
  size_t model_points_ = 0;
};

class Tpe final : public Optimizer {
 public:
  Tpe(const ConfigSpace& space, int max_epochs, const OptimizerOptions& options, uint64_t seed)
      : space_(space), max_epochs_(max_epochs), options_(options), rng_(seed) {}

  Suggestion suggest() override {
    const size_t n = history_.size();
    if (n < 4) return {uniform_config(space_, rng_), max_epochs_};

    if (model_points_ != n) {
      const size_t n_good = std::max<size_t>(
          2, static_cast<size_t>(std::floor(options_.tpe_gamma * static_cast<double>(n))));
      std::vector<std::pair<double, std::vector<int>>> sorted = history_;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::vector<int>> good_pts, bad_pts;
      for (size_t i = 0; i < sorted.size(); ++i)
        (i < n_good ? good_pts : bad_pts).push_back(std::move(sorted[i].second));
      good_ = UnivariateKde::fit(space_, good_pts);
      bad_ = UnivariateKde::fit(space_, bad_pts);
      model_points_ = n;
    }
    const uint64_t config =
        acquisition_argmax(space_, *good_, *bad_, options_.tpe_candidates, rng_);
    return {config, max_epochs_};
  }

  void observe(const Observation& obs) override {
    history_.emplace_back(obs.valid_mse, space_.decode(obs.config));
  }

 private:
  ConfigSpace space_;
  int max_epochs_;
  OptimizerOptions options_;
  Rng rng_;
  std::vector<std::pair<double, std::vector<int>>> history_;
  std::optional<UnivariateKde> good_, bad_;
  size_t model_points_ = 0;
};

class ForestBo final : public Optimizer {
 public:
  ForestBo(const ConfigSpace& space, int max_epochs, const OptimizerOptions& options, uint64_t seed)
      : space_(space), max_epochs_(max_epochs), options_(options), rng_(seed) {}

  Suggestion suggest() override {
    const int idx = suggestion_index_++;
    if (idx % options_.rf_random_interval == options_.rf_random_interval - 1 ||
        history_x_.size() < 2)
      return {random_unsaturated(), max_epochs_};

    RegressionForest::Options fo;
    fo.n_trees = options_.rf_trees;
    fo.min_leaf = 1;
    const RegressionForest forest = RegressionForest::fit(history_x_, history_y_, fo, rng_);

    double best_mean = std::numeric_limits<double>::infinity();
    for (const auto& [config, stats] : per_config_) {
      const double mean = stats.sum / stats.count;
      best_mean = std::min(best_mean, mean);
    }

    std::vector<int> probe(static_cast<size_t>(space_.num_params()));
    auto acq = [&](uint64_t config) {
      if (saturated(config)) return -std::numeric_limits<double>::infinity();
      const auto pos = space_.decode(config);
      const auto pred = forest.predict(pos);
      return expected_improvement(pred.mean, pred.variance, best_mean);
    };

    uint64_t best_config = 0;
    double best_acq = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < options_.rf_local_starts; ++s) {
      const uint64_t start = random_unsaturated();
      const uint64_t end = local_search_max(space_, acq, start);
      const double a = acq(end);
      if (a > best_acq) {
        best_acq = a;
        best_config = end;
      }
    }
    if (best_acq == -std::numeric_limits<double>::infinity()) best_config = random_unsaturated();
    return {best_config, max_epochs_};
  }

  void observe(const Observation& obs) override {
    history_x_.push_back(space_.decode(obs.config));
    history_y_.push_back(obs.valid_mse);
    auto& stats = per_config_[obs.config];
    stats.sum += obs.valid_mse;
    stats.count += 1;
  }

 private:
  bool saturated(uint64_t config) const {
    const auto it = per_config_.find(config);
    return it != per_config_.end() && it->second.count >= options_.rf_max_evals_per_config;
  }

  // Uniform over configs still below the per-config evaluation cap. After a
  // bounded number of rejections, fall back to the least-observed config
  // (lowest index on ties) so tiny spaces cannot spin forever.
  uint64_t random_unsaturated() {
    for (int tries = 0; tries < 128; ++tries) {
      const uint64_t c = uniform_config(space_, rng_);
      if (!saturated(c)) return c;
    }
    uint64_t best = 0;
    int best_count = std::numeric_limits<int>::max();
    for (uint64_t c = 0; c < space_.cardinality(); ++c) {
      const auto it = per_config_.find(c);
      const int count = it == per_config_.end() ? 0 : it->second.count;
      if (count < best_count) {
        best_count = count;
        best = c;
      }
    }
    return best;
  }

  struct Stats {
    double sum = 0.0;
    int count = 0;
  };

  ConfigSpace space_;
  int max_epochs_;
  OptimizerOptions options_;
  Rng rng_;
  int suggestion_index_ = 0;
  std::vector<std::vector<int>> history_x_;
  std::vector<double> history_y_;
  std::unordered_map<uint64_t, Stats> per_config_;
};

class Evolution final : public Optimizer {
 public:
  Evolution(const ConfigSpace& space, int max_epochs, const OptimizerOptions& options,
            uint64_t seed)
      : space_(space), max_epochs_(max_epochs), options_(options), rng_(seed) {}

  Suggestion suggest() override {
    if (suggestion_index_++ < options_.re_population || population_.empty())
      return {uniform_config(space_, rng_), max_epochs_};

    // Tournament draws members with replacement; best by (error, index).
    std::pair<double, uint64_t> best{std::numeric_limits<double>::infinity(), 0};
    bool have = false;
    for (int t = 0; t < options_.re_tournament; ++t) {
      const auto& m = population_[rng_.below(population_.size())];
      const std::pair<double, uint64_t> key{m.error, m.config};
      if (!have || key < best) {
        best = key;
        have = true;
      }
    }

    // Mutate exactly one uniformly chosen parameter to a different value.
    auto positions = space_.decode(best.second);
    const int p = rng_.below_int(space_.num_params());
    const int card = space_.param(p).cardinality();
    if (card > 1) {
      int v = rng_.below_int(card - 1);
      if (v >= positions[static_cast<size_t>(p)]) ++v;
      positions[static_cast<size_t>(p)] = v;
    }
    return {space_.encode(positions), max_epochs_};
  }

  void observe(const Observation& obs) override {
    population_.push_back(Member{obs.config, obs.valid_mse});
    if (population_.size() > static_cast<size_t>(options_.re_population)) population_.pop_front();
  }

  size_t population_size() const { return population_.size(); }

 private:
  struct Member {
    uint64_t config = 0;
    double error = 0.0;
  };

  ConfigSpace space_;
  int max_epochs_;
  OptimizerOptions options_;
  Rng rng_;
  int suggestion_index_ = 0;
  std::deque<Member> population_;
};

class Reinforce final : public Optimizer {
 public:
  Reinforce(const ConfigSpace& space, int max_epochs, const OptimizerOptions& options,
            uint64_t seed)
      : space_(space), max_epochs_(max_epochs), options_(options), rng_(seed) {
    logits_.resize(static_cast<size_t>(space.num_params()));
    for (int p = 0; p < space.num_params(); ++p)
      logits_[static_cast<size_t>(p)].assign(static_cast<size_t>(space.param(p).cardinality()), 0.0);
  }

  Suggestion suggest() override {
    std::vector<int> positions(logits_.size());
    for (size_t p = 0; p < logits_.size(); ++p) {
      const auto probs = softmax(logits_[p]);
      const double u = rng_.next_double();
      double acc = 0.0;
      int pick = static_cast<int>(probs.size()) - 1;
      for (size_t v = 0; v < probs.size(); ++v) {
        acc += probs[v];
        if (u < acc) {
          pick = static_cast<int>(v);
          break;
        }
      }
      positions[p] = pick;
    }
    return {space_.encode(positions), max_epochs_};
  }

  void observe(const Observation& obs) override {
    const double reward = -obs.valid_mse;
    if (!have_baseline_) {
      baseline_ = reward;
      have_baseline_ = true;
    }
    baseline_ = options_.rl_baseline_momentum * baseline_ +
                (1.0 - options_.rl_baseline_momentum) * reward;
    const double advantage = reward - baseline_;

    const auto positions = space_.decode(obs.config);
    for (size_t p = 0; p < logits_.size(); ++p) {
      const auto probs = softmax(logits_[p]);
      for (size_t v = 0; v < probs.size(); ++v) {
        const double indicator = static_cast<int>(v) == positions[p] ? 1.0 : 0.0;
        logits_[p][v] += options_.rl_learning_rate * advantage * (indicator - probs[v]);
      }
    }
  }

  const std::vector<std::vector<double>>& logits() const { return logits_; }
  double baseline() const { return baseline_; }

 private:
  static std::vector<double> softmax(const std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
      p[i] = std::exp(logits[i] - mx);
      sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
  }

  ConfigSpace space_;
  int max_epochs_;
  OptimizerOptions options_;
  Rng rng_;
  std::vector<std::vector<double>> logits_;
  double baseline_ = 0.0;
  bool have_baseline_ = false;
};

}  // namespace

std::optional<DensityPair> bohb_model_fit(
    const ConfigSpace& space, const std::vector<std::pair<double, std::vector<int>>>& history,
    double gamma, const KdeOptions& kde_options) {
  const size_t d = static_cast<size_t>(space.num_params());
  const size_t min_side = d + 2;
  if (history.size() < 2 * min_side) return std::nullopt;

  const size_t n = history.size();
  const size_t n_good =
      std::max(min_side, static_cast<size_t>(std::floor(gamma * static_cast<double>(n))));

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return history[a].first < history[b].first; });

  std::vector<std::vector<int>> good_pts, bad_pts;
  good_pts.reserve(n_good);
  bad_pts.reserve(n - n_good);
  for (size_t i = 0; i < n; ++i)
    (i < n_good ? good_pts : bad_pts).push_back(history[order[i]].second);

  return DensityPair{GridKde::fit(space, std::move(good_pts), kde_options),
                     GridKde::fit(space, std::move(bad_pts), kde_options)};
}

uint64_t local_search_max(const ConfigSpace& space, const std::function<double(uint64_t)>& acq,
                          uint64_t start, std::vector<uint64_t>* path) {
  uint64_t current = start;
  double current_acq = acq(current);
  if (path) path->push_back(current);
  for (;;) {
    uint64_t best_neighbor = current;
    double best_acq = current_acq;
    for (uint64_t nb : space.neighbors(current)) {
      const double a = acq(nb);
      if (a > best_acq) {
        best_acq = a;
        best_neighbor = nb;
      }
    }
    if (best_neighbor == current) return current;
    current = best_neighbor;
    current_acq = best_acq;
    if (path) path->push_back(current);
  }
}

std::unique_ptr<Optimizer> make_optimizer(Strategy s, const ConfigSpace& space, int max_epochs,
                                          const OptimizerOptions& options, uint64_t seed) {
  switch (s) {
    case Strategy::rs: return std::make_unique<RandomSearch>(space, max_epochs, seed);
    case Strategy::tpe: return std::make_unique<Tpe>(space, max_epochs, options, seed);
    case Strategy::bohb: return std::make_unique<Bohb>(space, max_epochs, options, seed);
    case Strategy::rf: return std::make_unique<ForestBo>(space, max_epochs, options, seed);
    case Strategy::re: return std::make_unique<Evolution>(space, max_epochs, options, seed);
    case Strategy::hb: return std::make_unique<Hyperband>(space, max_epochs, options, seed);
    case Strategy::rl: return std::make_unique<Reinforce>(space, max_epochs, options, seed);
  }
  throw std::domain_error("unknown strategy");
}

}  // namespace tabbench
