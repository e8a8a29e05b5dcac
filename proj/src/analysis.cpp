#include "tabbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabbench/error.hpp"
#include "tabbench/stats.hpp"

namespace tabbench {

double noise_std(const BenchTable& table, uint64_t config, int epoch) {
  if (epoch < 1 || epoch > table.max_epochs())
    throw std::out_of_range("epoch " + std::to_string(epoch) + " out of range [1, " +
                            std::to_string(table.max_epochs()) + "]");
  const auto& records = table.entry(config).records;
  std::vector<double> vals;
  vals.reserve(records.size());
  for (const auto& rec : records) vals.push_back(rec.valid_curve[static_cast<size_t>(epoch - 1)]);
  return population_std(vals);
}

double noise_std_test(const BenchTable& table, uint64_t config) {
  const auto& records = table.entry(config).records;
  std::vector<double> vals;
  vals.reserve(records.size());
  for (const auto& rec : records) vals.push_back(rec.final_test_mse);
  return population_std(vals);
}

namespace {

// Indices of the `frac` best configs under `score` (ascending, ties by
// index). Throws when fewer than 2 configs are selected.
std::vector<uint64_t> top_set(const std::vector<double>& score, double frac) {
  const auto n = static_cast<uint64_t>(score.size());
  if (!(frac > 0.0) || frac > 1.0) throw std::domain_error("top fraction must be in (0, 1]");
  auto count = static_cast<uint64_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  if (count > n) count = n;
  if (count < 2)
    throw std::domain_error("top fraction " + std::to_string(frac) + " selects fewer than 2 of " +
                            std::to_string(n) + " configs");
  std::vector<uint64_t> order(n);
  std::iota(order.begin(), order.end(), uint64_t{0});
  std::sort(order.begin(), order.end(), [&](uint64_t a, uint64_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    return a < b;
  });
  order.resize(count);
  return order;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<uint64_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (uint64_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

RankCorrResult rank_corr_budgets(const BenchTable& table, std::span<const int> budgets,
                                 std::span<const double> top_fracs, Metric selection) {
  if (budgets.empty()) throw std::domain_error("need at least one budget");
  if (top_fracs.empty()) throw std::domain_error("need at least one top fraction");
  if (selection != Metric::test && selection != Metric::valid)
    throw std::domain_error("top-set selection must use the test or valid metric");
  for (int b : budgets) {
    if (b < 1 || b > table.max_epochs())
      throw std::out_of_range("budget " + std::to_string(b) + " out of range [1, " +
                              std::to_string(table.max_epochs()) + "]");
  }

  const uint64_t n = table.space().cardinality();
  std::vector<double> score(n), at_max(n);
  for (uint64_t c = 0; c < n; ++c) {
    score[c] = table.mean_metric(c, selection);
    at_max[c] = table.mean_metric(c, Metric::valid, table.max_epochs());
  }

  RankCorrResult out;
  out.budgets.assign(budgets.begin(), budgets.end());
  out.top_fracs.assign(top_fracs.begin(), top_fracs.end());
  out.rho.resize(top_fracs.size());

  std::vector<double> at_budget(n);
  for (size_t f = 0; f < top_fracs.size(); ++f) {
    const auto sel = top_set(score, top_fracs[f]);
    const auto ys = gather(at_max, sel);
    out.rho[f].resize(budgets.size());
    for (size_t b = 0; b < budgets.size(); ++b) {
      for (uint64_t c = 0; c < n; ++c) at_budget[c] = table.mean_metric(c, Metric::valid, budgets[b]);
      out.rho[f][b] = spearman(gather(at_budget, sel), ys);
    }
  }
  return out;
}

NeighborhoodReport local_neighborhood(const BenchTable& table, uint64_t config) {
  NeighborhoodReport rep;
  rep.base_config = config;
  rep.base_mean_test = table.mean_metric(config, Metric::test);
  if (rep.base_mean_test == 0.0)
    throw std::domain_error("relative neighborhood changes are undefined at zero base loss");

  const auto& space = table.space();
  const auto positions = space.decode(config);
  std::vector<int> probe = positions;
  for (int p = 0; p < space.num_params(); ++p) {
    for (int v = 0; v < space.param(p).cardinality(); ++v) {
      if (v == positions[static_cast<size_t>(p)]) continue;
      probe[static_cast<size_t>(p)] = v;
      NeighborChange ch;
      ch.param = p;
      ch.old_pos = positions[static_cast<size_t>(p)];
      ch.new_pos = v;
      ch.config = space.encode(probe);
      ch.mean_test = table.mean_metric(ch.config, Metric::test);
      ch.relative_change = (ch.mean_test - rep.base_mean_test) / rep.base_mean_test;
      rep.changes.push_back(ch);
    }
    probe[static_cast<size_t>(p)] = positions[static_cast<size_t>(p)];
  }
  std::stable_sort(rep.changes.begin(), rep.changes.end(),
                   [](const NeighborChange& a, const NeighborChange& b) {
                     return a.relative_change < b.relative_change;
                   });
  return rep;
}

std::vector<std::vector<double>> cross_dataset_rank_corr(
    std::span<const BenchTable* const> tables, double top_frac) {
  if (tables.size() < 2) throw std::domain_error("cross-dataset correlation needs at least 2 tables");
  for (size_t i = 1; i < tables.size(); ++i) {
    if (!(tables[i]->space() == tables[0]->space()))
      throw IntegrityError("tables '" + tables[0]->dataset_name() + "' and '" +
                           tables[i]->dataset_name() + "' have different config spaces");
  }

  const size_t k = tables.size();
  std::vector<std::vector<double>> means(k);
  std::vector<std::vector<uint64_t>> tops(k);
  for (size_t i = 0; i < k; ++i) {
    means[i] = tables[i]->mean_test_all();
    tops[i] = top_set(means[i], top_frac);
  }

  std::vector<std::vector<double>> rho(k, std::vector<double>(k, 1.0));
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = a + 1; b < k; ++b) {
      const double on_a = spearman(gather(means[a], tops[a]), gather(means[b], tops[a]));
      const double on_b = spearman(gather(means[a], tops[b]), gather(means[b], tops[b]));
      rho[a][b] = rho[b][a] = 0.5 * (on_a + on_b);
    }
  }
  return rho;
}

}  // namespace tabbench
