#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tabbench/harness.hpp"
#include "testutil.hpp"

using namespace tabbench;
namespace fs = std::filesystem;

namespace {

// 12-config noiseless table with distinct dyadic losses and runtimes, so
// every trace field can be recomputed exactly from first principles.
BenchTable oracle_table(int max_epochs = 4) {
  const ConfigSpace space = testutil::ordinal_space({4, 3});
  const CellFn value = [](std::span<const int> p) { return 1.0 + 0.5 * p[0] + 0.0625 * p[1]; };
  const CellFn runtime = [](std::span<const int> p) { return 2.0 + p[0]; };
  return testutil::fn_table(space, value, 2, max_epochs, runtime);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("tabbench_harness_" + tag)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("traces replay exactly from first principles") {
  const BenchTable table = oracle_table();
  const double best_test = table.global_optimum().second;
  const double init = initial_regret(table);
  // Spread of the dyadic loss surface: worst (3,2) minus best (0,0).
  CHECK(init == 0.5 * 3 + 0.0625 * 2);

  RunLimits limits;
  limits.max_evals = 20;
  const RunTrace trace = run_once(table, Strategy::rs, 99, limits);
  CHECK(trace.error.empty());
  CHECK(trace.strategy == std::string("rs"));
  REQUIRE(trace.steps.size() == 20);
  CHECK(trace.initial_regret == init);

  double clock = 0.0;
  double best_valid = std::numeric_limits<double>::infinity();
  uint64_t incumbent = 0;
  bool has = false;
  for (const TraceStep& s : trace.steps) {
    // Full-budget random search: the charge is the whole stored runtime.
    CHECK(s.budget_epochs == table.max_epochs());
    const double rt = table.mean_metric(s.config, Metric::runtime);
    CHECK(s.charged_seconds == rt);
    clock += s.charged_seconds;
    CHECK(s.clock_seconds == clock);  // bit-exact running sum
    // Noiseless table: the observed loss is the surface value itself.
    CHECK(s.valid_mse == table.mean_metric(s.config, Metric::valid));
    if (s.valid_mse < best_valid) {
      best_valid = s.valid_mse;
      incumbent = s.config;
      has = true;
    }
    CHECK(s.has_incumbent == has);
    CHECK(s.incumbent_config == incumbent);
    CHECK(s.incumbent_valid == best_valid);
    CHECK(s.regret == table.mean_test_all()[incumbent] - best_test);
  }

  SUBCASE("regret is a right-continuous step function of the clock") {
    const TraceStep& first = trace.steps.front();
    CHECK(trace.regret_at(first.clock_seconds * 0.5) == init);
    CHECK(trace.regret_at(first.clock_seconds) == first.regret);
    CHECK(trace.regret_at(trace.final_clock()) == trace.final_regret());
    CHECK(trace.regret_at(trace.final_clock() * 10) == trace.final_regret());
    for (size_t i = 1; i < trace.steps.size(); ++i)
      CHECK(trace.steps[i].regret <= trace.steps[i - 1].regret);
  }

  SUBCASE("same seed, same trace; different seed, different trace") {
    const RunTrace again = run_once(table, Strategy::rs, 99, limits);
    REQUIRE(again.steps.size() == trace.steps.size());
    for (size_t i = 0; i < trace.steps.size(); ++i) {
      CHECK(again.steps[i].config == trace.steps[i].config);
      CHECK(again.steps[i].clock_seconds == trace.steps[i].clock_seconds);
    }
    const RunTrace other = run_once(table, Strategy::rs, 100, limits);
    bool differs = false;
    for (size_t i = 0; i < other.steps.size(); ++i)
      differs |= other.steps[i].config != trace.steps[i].config;
    CHECK(differs);
  }
}

TEST_CASE("the clock cap stops the run right after crossing the limit") {
  const BenchTable table = oracle_table();
  RunLimits limits;
  limits.max_seconds = 17.0;
  const RunTrace trace = run_once(table, Strategy::rs, 5, limits);
  REQUIRE(trace.steps.size() >= 2);
  CHECK(trace.final_clock() >= 17.0);
  CHECK(trace.steps[trace.steps.size() - 2].clock_seconds < 17.0);

  SUBCASE("running with no cap at all is refused") {
    CHECK_THROWS_AS(run_once(table, Strategy::rs, 1, RunLimits{}), std::domain_error);
  }
}

TEST_CASE("full-budget incumbent mode ignores cheap fidelities") {
  const BenchTable table = oracle_table(9);
  OptimizerOptions opt;
  opt.hb_min_budget = 1;

  RunLimits strict;
  strict.max_evals = 13;  // one full exploration bracket: 9@1, 3@3, 1@9
  strict.incumbent = IncumbentMode::max_budget_only;
  const RunTrace guarded = run_once(table, Strategy::hb, 3, strict, opt);
  REQUIRE(guarded.steps.size() == 13);
  for (const TraceStep& s : guarded.steps) {
    if (s.budget_epochs < 9) continue;
    CHECK(s.has_incumbent);
  }
  for (int i = 0; i < 12; ++i) {
    CHECK_FALSE(guarded.steps[static_cast<size_t>(i)].has_incumbent);
    CHECK(guarded.steps[static_cast<size_t>(i)].regret == guarded.initial_regret);
  }
  CHECK(guarded.steps.back().budget_epochs == 9);
  CHECK(guarded.steps.back().has_incumbent);

  RunLimits loose = strict;
  loose.incumbent = IncumbentMode::any_budget;
  const RunTrace eager = run_once(table, Strategy::hb, 3, loose, opt);
  CHECK(eager.steps.front().has_incumbent);
}

TEST_CASE("run seeds separate strategies and repetitions") {
  CHECK(run_seed(1, Strategy::rs, 0) == run_seed(1, Strategy::rs, 0));
  CHECK(run_seed(1, Strategy::rs, 0) != run_seed(1, Strategy::rs, 1));
  CHECK(run_seed(1, Strategy::rs, 0) != run_seed(1, Strategy::tpe, 0));
  CHECK(run_seed(1, Strategy::rs, 0) != run_seed(2, Strategy::rs, 0));
}

TEST_CASE("log time grid") {
  const auto grid = log_time_grid(0.5, 128.0, 9);
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(grid.back() == 128.0);
  for (size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] > grid[i - 1]);
    // log-spacing: constant ratio between consecutive points
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[1] / grid[0]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(log_time_grid(0.0, 10.0, 4), std::domain_error);
}

TEST_CASE("aggregate quantiles match a sort oracle") {
  const BenchTable table = oracle_table();
  RunLimits limits;
  limits.max_evals = 12;
  std::vector<RunTrace> runs;
  for (int i = 0; i < 9; ++i) runs.push_back(run_once(table, Strategy::rs, 1000 + i, limits));
  std::vector<const RunTrace*> ptrs;
  for (const RunTrace& r : runs) ptrs.push_back(&r);

  double t_max = 0.0;
  for (const RunTrace& r : runs) t_max = std::max(t_max, r.final_clock());
  const auto grid = log_time_grid(1.0, t_max, 7);
  const AggregateCurve curve = aggregate_regret("rs", ptrs, grid);
  CHECK(curve.strategy == "rs");
  REQUIRE(curve.time == grid);
  REQUIRE(curve.median.size() == grid.size());
  for (size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> vals;
    for (const RunTrace* r : ptrs) vals.push_back(r->regret_at(grid[g]));
    std::sort(vals.begin(), vals.end());
    // nearest-rank on 9 runs: ceil(p * 9) - 1
    CHECK(curve.q25[g] == vals[2]);
    CHECK(curve.median[g] == vals[4]);
    CHECK(curve.q75[g] == vals[6]);
  }

  SUBCASE("final-regret distribution") {
    const Ecdf ecdf = final_regret_ecdf(ptrs);
    double worst = 0.0, best = 1e300;
    for (const RunTrace* r : ptrs) {
      worst = std::max(worst, r->final_regret());
      best = std::min(best, r->final_regret());
    }
    CHECK(ecdf.eval(worst) == 1.0);
    if (best > 0) CHECK(ecdf.eval(best * 0.5) == 0.0);
  }
}

TEST_CASE("comparison bundles are complete and byte-stable") {
  const BenchTable table = oracle_table();
  CompareOptions opt;
  opt.strategies = {Strategy::rs, Strategy::re};
  opt.runs_per_strategy = 4;
  opt.master_seed = 2024;
  opt.limits.max_evals = 15;
  opt.grid_points = 16;

  const CompareResult result = compare(table, opt);
  REQUIRE(result.strategy_names.size() == 2);
  CHECK(result.strategy_names[0] == "rs");
  CHECK(result.strategy_names[1] == "re");
  REQUIRE(result.traces.size() == 2);
  REQUIRE(result.traces[0].size() == 4);
  CHECK(result.initial_regret == initial_regret(table));
  for (size_t s = 0; s < 2; ++s)
    for (size_t r = 0; r < 4; ++r) {
      CHECK(result.traces[s][r].seed ==
            run_seed(2024, opt.strategies[s], static_cast<int>(r)));
      CHECK(result.traces[s][r].steps.size() == 15);
    }
  REQUIRE(result.curves.size() == 2);
  if (!result.grid.empty()) {
    CHECK(result.grid.size() == 16);
    CHECK(result.curves[0].time == result.grid);
  }

  // Same options, same everything.
  const CompareResult again = compare(table, opt);
  for (size_t s = 0; s < 2; ++s)
    for (size_t r = 0; r < 4; ++r)
      CHECK(again.traces[s][r].final_regret() == result.traces[s][r].final_regret());

  TempDir a("bundle_a"), b("bundle_b");
  write_compare_bundle(a.str(), table, opt, result);
  write_compare_bundle(b.str(), table, opt, again);
  for (const char* name : {"traces.csv", "curves.csv", "ecdf.csv", "meta.json", "curves.svg",
                           "ecdf.svg"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a.path / name));
    const std::string bytes = slurp(a.path / name);
    CHECK(!bytes.empty());
    CHECK(bytes == slurp(b.path / name));
  }
  CHECK(slurp(a.path / "curves.svg").find("<svg") != std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(a.path / "meta.json"));
  CHECK(meta.is_object());

  // traces.csv: one header plus one row per step.
  const std::string traces_csv = slurp(a.path / "traces.csv");
  const size_t rows = static_cast<size_t>(std::count(traces_csv.begin(), traces_csv.end(), '\n'));
  CHECK(rows == 1 + 2 * 4 * 15);
}

}  // TEST_SUITE
