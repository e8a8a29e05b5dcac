#include "tabbench/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "tabbench/error.hpp"
#include "tabbench/svg.hpp"

namespace tabbench {

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, uint64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, int v) {
  char buf[16];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

double RunTrace::regret_at(double t) const {
  // Last step whose clock is <= t; before the first completed evaluation the
  // run still has its initial (worst-case) regret.
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double value, const TraceStep& s) { return value < s.clock_seconds; });
  if (it == steps.begin()) return initial_regret;
  return std::prev(it)->regret;
}

double initial_regret(const BenchTable& table) {
  const auto& tests = table.mean_test_all();
  const auto [lo, hi] = std::minmax_element(tests.begin(), tests.end());
  return *hi - *lo;
}

RunTrace run_once(const BenchTable& table, Strategy strategy, uint64_t seed,
                  const RunLimits& limits, const OptimizerOptions& options) {
  if (limits.max_evals <= 0 && limits.max_seconds <= 0.0)
    throw std::domain_error("set max_evals or max_seconds");

  RunTrace trace;
  trace.strategy = strategy_name(strategy);
  trace.seed = seed;
  trace.initial_regret = initial_regret(table);

  const double best_test = table.global_optimum().second;
  const auto& tests = table.mean_test_all();

  Rng query_rng(mix64(seed, 2));
  double clock = 0.0;
  bool has_incumbent = false;
  uint64_t incumbent_config = 0;
  double incumbent_valid = std::numeric_limits<double>::infinity();

  try {
    auto opt = make_optimizer(strategy, table.space(), table.max_epochs(), options, mix64(seed, 1));
    while ((limits.max_evals <= 0 || static_cast<int>(trace.steps.size()) < limits.max_evals) &&
           (limits.max_seconds <= 0.0 || clock < limits.max_seconds) && !opt->finished()) {
      const Suggestion sug = opt->suggest();
      const QueryResult q = table.query(sug.config, sug.budget_epochs, query_rng);
      clock += q.runtime_charged_seconds;
      opt->observe(Observation{sug.config, sug.budget_epochs, q.valid_mse,
                               q.runtime_charged_seconds});

      const bool counts = limits.incumbent == IncumbentMode::any_budget ||
                          sug.budget_epochs == table.max_epochs();
      if (counts && q.valid_mse < incumbent_valid) {
        incumbent_valid = q.valid_mse;
        incumbent_config = sug.config;
        has_incumbent = true;
      }

      TraceStep step;
      step.config = sug.config;
      step.budget_epochs = sug.budget_epochs;
      step.valid_mse = q.valid_mse;
      step.charged_seconds = q.runtime_charged_seconds;
      step.clock_seconds = clock;
      step.has_incumbent = has_incumbent;
      step.incumbent_config = incumbent_config;
      step.incumbent_valid = incumbent_valid;
      step.regret = has_incumbent ? tests[incumbent_config] - best_test : trace.initial_regret;
      trace.steps.push_back(step);
    }
  } catch (const std::exception& e) {
    trace.error = e.what();
  }
  return trace;
}

uint64_t run_seed(uint64_t master_seed, Strategy s, int run_index) {
  return mix64(hash_str(master_seed, strategy_name(s)), static_cast<uint64_t>(run_index));
}

std::vector<double> log_time_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max >= t_min)) throw std::domain_error("need 0 < t_min <= t_max");
  if (n < 1) throw std::domain_error("need at least one grid point");
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(n));
  if (n == 1) {
    grid.push_back(t_max);
    return grid;
  }
  const double a = std::log(t_min), b = std::log(t_max);
  for (int i = 0; i < n; ++i)
    grid.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
  grid.back() = t_max;
  return grid;
}

AggregateCurve aggregate_regret(const std::string& label, const std::vector<const RunTrace*>& runs,
                                const std::vector<double>& grid) {
  if (runs.empty()) throw std::domain_error("no runs to aggregate");
  AggregateCurve curve;
  curve.strategy = label;
  curve.time = grid;
  curve.q25.reserve(grid.size());
  curve.median.reserve(grid.size());
  curve.q75.reserve(grid.size());
  std::vector<double> values(runs.size());
  for (double t : grid) {
    for (size_t i = 0; i < runs.size(); ++i) values[i] = runs[i]->regret_at(t);
    curve.q25.push_back(quantile_nearest_rank(values, 0.25));
    curve.median.push_back(quantile_nearest_rank(values, 0.5));
    curve.q75.push_back(quantile_nearest_rank(values, 0.75));
  }
  return curve;
}

Ecdf final_regret_ecdf(const std::vector<const RunTrace*>& runs) {
  std::vector<double> finals;
  finals.reserve(runs.size());
  for (const RunTrace* r : runs) finals.push_back(r->final_regret());
  return Ecdf(std::move(finals));
}

CompareResult compare(const BenchTable& table, const CompareOptions& options) {
  if (options.strategies.empty()) throw std::domain_error("no strategies selected");
  if (options.runs_per_strategy < 1) throw std::domain_error("need at least one run per strategy");

  CompareResult result;
  result.initial_regret = initial_regret(table);
  for (Strategy s : options.strategies) {
    result.strategy_names.emplace_back(strategy_name(s));
    std::vector<RunTrace> runs;
    runs.reserve(static_cast<size_t>(options.runs_per_strategy));
    for (int i = 0; i < options.runs_per_strategy; ++i)
      runs.push_back(run_once(table, s, run_seed(options.master_seed, s, i), options.limits,
                              options.optimizer));
    result.traces.push_back(std::move(runs));
  }

  double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (const auto& runs : result.traces)
    for (const auto& r : runs)
      if (!r.steps.empty()) {
        t_min = std::min(t_min, r.steps.front().clock_seconds);
        t_max = std::max(t_max, r.final_clock());
      }
  if (std::isfinite(t_min) && t_min > 0.0 && t_max >= t_min) {
    result.grid = log_time_grid(t_min, t_max, options.grid_points);
    for (size_t si = 0; si < result.traces.size(); ++si) {
      std::vector<const RunTrace*> ptrs;
      for (const auto& r : result.traces[si]) ptrs.push_back(&r);
      result.curves.push_back(aggregate_regret(result.strategy_names[si], ptrs, result.grid));
    }
  }
  return result;
}

void write_compare_bundle(const std::string& dir, const BenchTable& table,
                          const CompareOptions& options, const CompareResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto join = [&](const char* name) { return (fs::path(dir) / name).string(); };

  // --- traces.csv ---------------------------------------------------------
  std::string csv =
      "strategy,run,step,config,budget_epochs,valid_mse,charged_seconds,clock_seconds,"
      "incumbent_valid,regret\n";
  for (size_t si = 0; si < result.traces.size(); ++si) {
    for (size_t ri = 0; ri < result.traces[si].size(); ++ri) {
      const RunTrace& r = result.traces[si][ri];
      for (size_t k = 0; k < r.steps.size(); ++k) {
        const TraceStep& s = r.steps[k];
        csv += result.strategy_names[si];
        csv += ',';
        append_number(csv, static_cast<uint64_t>(ri));
        csv += ',';
        append_number(csv, static_cast<uint64_t>(k));
        csv += ',';
        append_number(csv, s.config);
        csv += ',';
        append_number(csv, s.budget_epochs);
        csv += ',';
        append_number(csv, s.valid_mse);
        csv += ',';
        append_number(csv, s.charged_seconds);
        csv += ',';
        append_number(csv, s.clock_seconds);
        csv += ',';
        append_number(csv, s.incumbent_valid);
        csv += ',';
        append_number(csv, s.regret);
        csv += '\n';
      }
    }
  }
  write_text_file(join("traces.csv"), csv);

  // --- curves.csv ---------------------------------------------------------
  csv = "strategy,time_seconds,regret_q25,regret_median,regret_q75\n";
  for (const auto& c : result.curves) {
    for (size_t i = 0; i < c.time.size(); ++i) {
      csv += c.strategy;
      csv += ',';
      append_number(csv, c.time[i]);
      csv += ',';
      append_number(csv, c.q25[i]);
      csv += ',';
      append_number(csv, c.median[i]);
      csv += ',';
      append_number(csv, c.q75[i]);
      csv += '\n';
    }
  }
  write_text_file(join("curves.csv"), csv);

  // --- ecdf.csv ------------------------------------------------------------
  csv = "strategy,final_regret,cumulative_fraction\n";
  std::vector<Ecdf> ecdfs;
  for (size_t si = 0; si < result.traces.size(); ++si) {
    std::vector<const RunTrace*> ptrs;
    for (const auto& r : result.traces[si]) ptrs.push_back(&r);
    ecdfs.push_back(final_regret_ecdf(ptrs));
    const auto& sorted = ecdfs.back().sorted_samples();
    for (size_t i = 0; i < sorted.size(); ++i) {
      csv += result.strategy_names[si];
      csv += ',';
      append_number(csv, sorted[i]);
      csv += ',';
      append_number(csv, static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
      csv += '\n';
    }
  }
  write_text_file(join("ecdf.csv"), csv);

  // --- meta.json ------------------------------------------------------------
  nlohmann::json meta;
  meta["dataset_name"] = table.dataset_name();
  meta["table_checksum"] = table.checksum();
  meta["cardinality"] = table.space().cardinality();
  meta["max_epochs"] = table.max_epochs();
  meta["n_seeds"] = table.n_seeds();
  const auto [opt_config, opt_test] = table.global_optimum();
  meta["global_optimum"] = {{"config", opt_config}, {"mean_test_mse", opt_test}};
  meta["initial_regret"] = result.initial_regret;
  meta["master_seed"] = options.master_seed;
  meta["runs_per_strategy"] = options.runs_per_strategy;
  meta["limits"] = {
      {"max_evals", options.limits.max_evals},
      {"max_seconds", options.limits.max_seconds},
      {"incumbent",
       options.limits.incumbent == IncumbentMode::any_budget ? "any_budget" : "max_budget_only"}};
  meta["strategies"] = result.strategy_names;
  nlohmann::json summary = nlohmann::json::array();
  for (size_t si = 0; si < result.traces.size(); ++si) {
    std::vector<double> finals;
    int failed = 0;
    for (const auto& r : result.traces[si]) {
      finals.push_back(r.final_regret());
      if (!r.error.empty()) ++failed;
    }
    summary.push_back({{"strategy", result.strategy_names[si]},
                       {"final_regret_q25", quantile_nearest_rank(finals, 0.25)},
                       {"final_regret_median", quantile_nearest_rank(finals, 0.5)},
                       {"final_regret_q75", quantile_nearest_rank(finals, 0.75)},
                       {"failed_runs", failed}});
  }
  meta["summary"] = summary;
  nlohmann::json errors = nlohmann::json::array();
  for (size_t si = 0; si < result.traces.size(); ++si)
    for (size_t ri = 0; ri < result.traces[si].size(); ++ri)
      if (!result.traces[si][ri].error.empty())
        errors.push_back({{"strategy", result.strategy_names[si]},
                          {"run", ri},
                          {"error", result.traces[si][ri].error}});
  meta["errors"] = errors;
  write_text_file(join("meta.json"), meta.dump(2) + "\n");

  // --- curves.svg ------------------------------------------------------------
  {
    std::vector<PlotSeries> series;
    std::vector<PlotBand> bands;
    for (size_t si = 0; si < result.curves.size(); ++si) {
      const auto& c = result.curves[si];
      const std::string color = default_palette()[si % default_palette().size()];
      bands.push_back(PlotBand{color, c.time, c.q25, c.q75, 0.15});
      series.push_back(PlotSeries{c.strategy, color, c.time, c.median, false, 1.8});
    }
    PlotOptions po;
    po.title = "Test regret of the incumbent over simulated time";
    po.x_label = "simulated seconds";
    po.y_label = "test regret";
    po.log_x = true;
    po.log_y = true;
    write_text_file(join("curves.svg"), render_line_plot(series, bands, po));
  }

  // --- ecdf.svg -------------------------------------------------------------
  {
    std::vector<PlotSeries> series;
    for (size_t si = 0; si < ecdfs.size(); ++si) {
      const auto& sorted = ecdfs[si].sorted_samples();
      PlotSeries s;
      s.label = result.strategy_names[si];
      s.color = default_palette()[si % default_palette().size()];
      s.step = true;
      for (size_t i = 0; i < sorted.size(); ++i) {
        s.x.push_back(sorted[i]);
        s.y.push_back(static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
      }
      series.push_back(std::move(s));
    }
    PlotOptions po;
    po.title = "Final regret across repeated runs";
    po.x_label = "final test regret";
    po.y_label = "fraction of runs";
    po.log_x = true;
    write_text_file(join("ecdf.svg"), render_line_plot(series, {}, po));
  }
}

}  // namespace tabbench
