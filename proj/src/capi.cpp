#include "tabbench.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabbench/analysis.hpp"
#include "tabbench/dataset.hpp"
#include "tabbench/error.hpp"
#include "tabbench/fanova.hpp"
#include "tabbench/gridgen.hpp"
#include "tabbench/harness.hpp"
#include "tabbench/optimizer.hpp"
#include "tabbench/rng.hpp"
#include "tabbench/stats.hpp"
#include "tabbench/svg.hpp"
#include "tabbench/synth.hpp"
#include "tabbench/table.hpp"

using nlohmann::json;

struct tb_table {
  tabbench::BenchTable t;
};

struct tb_rng {
  tabbench::Rng r;
};

namespace {

thread_local std::string g_error;

int fail_arg(const char* message) {
  g_error = message;
  return TB_ERR_ARG;
}

int map_current_exception() {
  try {
    throw;
  } catch (const tabbench::ParseError& e) {
    g_error = e.what();
    return TB_ERR_PARSE;
  } catch (const tabbench::IntegrityError& e) {
    g_error = e.what();
    return TB_ERR_INTEGRITY;
  } catch (const tabbench::Error& e) {
    g_error = e.what();
    return TB_ERR_IO;
  } catch (const std::logic_error& e) {
    g_error = e.what();
    return TB_ERR_ARG;
  } catch (const std::exception& e) {
    g_error = e.what();
    return TB_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return TB_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int emit_json(const json& j, char** out) {
  *out = dup_string(j.dump(2));
  if (!*out) {
    g_error = "out of memory";
    return TB_ERR_INTERNAL;
  }
  return TB_OK;
}

json value_to_json(const tabbench::Value& v) {
  return v.is_number() ? json(v.num()) : json(v.str());
}

json space_to_json(const tabbench::ConfigSpace& space) {
  json arr = json::array();
  for (const auto& p : space.params()) {
    json values = json::array();
    for (const auto& v : p.values) values.push_back(value_to_json(v));
    arr.push_back({{"name", p.name},
                   {"kind", p.kind == tabbench::ParamKind::ordinal ? "ordinal" : "categorical"},
                   {"values", values}});
  }
  return arr;
}

tabbench::RunLimits limits_from(const tb_run_options& o) {
  tabbench::RunLimits limits;
  limits.max_evals = o.max_evals;
  limits.max_seconds = o.max_seconds;
  limits.incumbent = o.incumbent_max_budget_only ? tabbench::IncumbentMode::max_budget_only
                                                 : tabbench::IncumbentMode::any_budget;
  return limits;
}

tabbench::OptimizerOptions optimizer_from(const tb_run_options& o) {
  tabbench::OptimizerOptions opts;
  opts.hb_eta = o.hb_eta;
  opts.hb_min_budget = o.hb_min_budget;
  opts.hb_max_budget = o.hb_max_budget;
  opts.hb_bracket_limit = o.hb_bracket_limit;
  opts.bohb_gamma = o.bohb_gamma;
  opts.bohb_min_bandwidth = o.bohb_min_bandwidth;
  opts.bohb_bandwidth_factor = o.bohb_bandwidth_factor;
  opts.bohb_candidates = o.bohb_candidates;
  opts.bohb_random_fraction = o.bohb_random_fraction;
  opts.tpe_gamma = o.tpe_gamma;
  opts.tpe_candidates = o.tpe_candidates;
  opts.rf_trees = o.rf_trees;
  opts.rf_max_evals_per_config = o.rf_max_evals_per_config;
  opts.rf_random_interval = o.rf_random_interval;
  opts.rf_local_starts = o.rf_local_starts;
  opts.re_population = o.re_population;
  opts.re_tournament = o.re_tournament;
  opts.rl_learning_rate = o.rl_learning_rate;
  opts.rl_baseline_momentum = o.rl_baseline_momentum;
  return opts;
}

void append_csv_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::vector<tabbench::Strategy> parse_strategies(const char* csv) {
  std::vector<tabbench::Strategy> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    // trim spaces around each name
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(tabbench::strategy_from_name(item.substr(a, b - a + 1)));
  }
  if (out.empty()) throw std::domain_error("no strategies given");
  return out;
}

}  // namespace

extern "C" {

const char* tb_version(void) { return "0.1.0"; }

const char* tb_last_error(void) { return g_error.c_str(); }

void tb_string_free(char* s) { std::free(s); }

/* ---- rng ---------------------------------------------------------------- */

tb_rng* tb_rng_new(uint64_t seed) { return new tb_rng{tabbench::Rng(seed)}; }

void tb_rng_free(tb_rng* rng) { delete rng; }

/* ---- tables --------------------------------------------------------------- */

int tb_table_open(const char* path, tb_table** out) {
  if (!path || !out) return fail_arg("null argument");
  *out = nullptr;
  try {
    *out = new tb_table{tabbench::BenchTable::load(path)};
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_table_save(const tb_table* table, const char* path) {
  if (!table || !path) return fail_arg("null argument");
  try {
    table->t.save(path);
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

void tb_table_free(tb_table* table) { delete table; }

int tb_table_validate(const tb_table* table) {
  if (!table) return fail_arg("null table");
  try {
    table->t.validate();
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_table_checksum(const tb_table* table, uint64_t* out) {
  if (!table || !out) return fail_arg("null argument");
  try {
    *out = table->t.checksum();
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

uint64_t tb_table_cardinality(const tb_table* table) {
  return table ? table->t.space().cardinality() : 0;
}

int tb_table_max_epochs(const tb_table* table) { return table ? table->t.max_epochs() : 0; }

int tb_table_n_seeds(const tb_table* table) { return table ? table->t.n_seeds() : 0; }

const char* tb_table_dataset_name(const tb_table* table) {
  return table ? table->t.dataset_name().c_str() : "";
}

int tb_table_num_params(const tb_table* table) {
  return table ? table->t.space().num_params() : 0;
}

int tb_table_meta_json(const tb_table* table, char** out_json) {
  if (!table || !out_json) return fail_arg("null argument");
  try {
    json meta;
    meta["dataset_name"] = table->t.dataset_name();
    meta["cardinality"] = table->t.space().cardinality();
    meta["max_epochs"] = table->t.max_epochs();
    meta["n_seeds"] = table->t.n_seeds();
    meta["checksum"] = table->t.checksum();
    const auto [config, mean_test] = table->t.global_optimum();
    meta["global_optimum"] = {{"config", config}, {"mean_test_mse", mean_test}};
    meta["space"] = space_to_json(table->t.space());
    return emit_json(meta, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_encode(const tb_table* table, const int* positions, int n, uint64_t* out) {
  if (!table || !positions || !out) return fail_arg("null argument");
  try {
    *out = table->t.space().encode(std::span<const int>(positions, static_cast<size_t>(n)));
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_decode(const tb_table* table, uint64_t config, int* out_positions, int n) {
  if (!table || !out_positions) return fail_arg("null argument");
  try {
    if (n < table->t.space().num_params()) throw std::domain_error("output buffer too small");
    const auto positions = table->t.space().decode(config);
    std::memcpy(out_positions, positions.data(), positions.size() * sizeof(int));
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_neighbors(const tb_table* table, uint64_t config, uint64_t* out, int capacity,
                 int* out_count) {
  if (!table || !out_count) return fail_arg("null argument");
  try {
    const auto nbs = table->t.space().neighbors(config);
    *out_count = static_cast<int>(nbs.size());
    if (out) {
      if (capacity < static_cast<int>(nbs.size())) throw std::domain_error("capacity too small");
      std::memcpy(out, nbs.data(), nbs.size() * sizeof(uint64_t));
    }
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_config_json(const tb_table* table, uint64_t config, char** out_json) {
  if (!table || !out_json) return fail_arg("null argument");
  try {
    const auto& space = table->t.space();
    const auto positions = space.decode(config);
    json params = json::object();
    for (int p = 0; p < space.num_params(); ++p)
      params[space.param(p).name] =
          value_to_json(space.param(p).values[static_cast<size_t>(positions[static_cast<size_t>(p)])]);
    json j = {{"config", config}, {"positions", positions}, {"params", params}};
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_query(const tb_table* table, uint64_t config, int budget_epochs, tb_rng* rng,
             double* out_valid_mse, double* out_charged_seconds, int64_t* out_seed_drawn) {
  if (!table || !rng) return fail_arg("null argument");
  try {
    const auto q = table->t.query(config, budget_epochs, rng->r);
    if (out_valid_mse) *out_valid_mse = q.valid_mse;
    if (out_charged_seconds) *out_charged_seconds = q.runtime_charged_seconds;
    if (out_seed_drawn) *out_seed_drawn = q.seed_drawn;
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_mean_metric(const tb_table* table, uint64_t config, const char* metric, int budget_epochs,
                   double* out) {
  if (!table || !metric || !out) return fail_arg("null argument");
  try {
    *out = table->t.mean_metric(config, tabbench::metric_from_name(metric), budget_epochs);
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

int tb_global_optimum(const tb_table* table, uint64_t* out_config, double* out_mean_test) {
  if (!table) return fail_arg("null table");
  try {
    const auto [config, mean_test] = table->t.global_optimum();
    if (out_config) *out_config = config;
    if (out_mean_test) *out_mean_test = mean_test;
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

/* ---- generators ------------------------------------------------------------ */

int tb_gen_synth(const char* space, const char* preset, int n_seeds, int max_epochs,
                 double noise_scale, double decay, uint64_t seed, const char* dataset_name,
                 tb_table** out) {
  if (!preset || !out) return fail_arg("null argument");
  *out = nullptr;
  try {
    const auto spec = tabbench::load_space_spec(space && *space ? space : "fcnet");
    *out = new tb_table{tabbench::gen_synthetic_preset(
        spec.space, preset, n_seeds, max_epochs, noise_scale, decay, seed,
        dataset_name && *dataset_name ? dataset_name : preset)};
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

void tb_grid_params_init(tb_grid_params* p) {
  if (!p) return;
  *p = tb_grid_params{};
  p->delimiter = 0;
  p->target_column = 0;
  p->train_frac = 0.6;
  p->valid_frac = 0.2;
  p->split_seed = 1;
  p->n_seeds = 4;
  p->max_epochs = 100;
  p->master_seed = 1;
  p->jobs = 1;
  p->limit_new_configs = 0;
  p->timing_model = 0;
  p->progress = 0;
}

int tb_gen_grid(const tb_grid_params* params, tb_table** out) {
  if (!params || !out) return fail_arg("null argument");
  if (!params->data_path) return fail_arg("data_path is required");
  *out = nullptr;
  try {
    const auto raw = tabbench::read_delimited(params->data_path, params->delimiter);
    tabbench::Rng split_rng(params->split_seed);
    const auto data = tabbench::prepare_dataset(raw, params->target_column, params->train_frac,
                                                params->valid_frac, split_rng);
    const auto spec =
        tabbench::load_space_spec(params->space && *params->space ? params->space : "fcnet");

    tabbench::GridGenOptions options;
    options.n_seeds = params->n_seeds;
    options.max_epochs = params->max_epochs;
    options.jobs = params->jobs;
    if (params->checkpoint_dir) options.checkpoint_dir = params->checkpoint_dir;
    options.timing =
        params->timing_model ? tabbench::TimingMode::model : tabbench::TimingMode::measured;
    options.dataset_name =
        params->dataset_name && *params->dataset_name ? params->dataset_name : "dataset";
    options.limit_new_configs = params->limit_new_configs;
    if (params->progress) {
      options.progress = [](uint64_t done, uint64_t total) {
        const uint64_t step = total >= 100 ? total / 100 : 1;
        if (done % step == 0 || done == total)
          std::fprintf(stderr, "trained %llu/%llu configs\n",
                       static_cast<unsigned long long>(done),
                       static_cast<unsigned long long>(total));
      };
    }

    auto result = tabbench::run_grid(spec.space, data, options, params->master_seed);
    if (result.has_value()) *out = new tb_table{std::move(*result)};
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

/* ---- analyses --------------------------------------------------------------- */

int tb_analyze_ecdf(const tb_table* table, const char* metric, int budget_epochs,
                    char** out_json) {
  if (!table || !metric || !out_json) return fail_arg("null argument");
  try {
    const auto m = tabbench::metric_from_name(metric);
    std::vector<double> values;
    values.reserve(table->t.space().cardinality());
    for (uint64_t c = 0; c < table->t.space().cardinality(); ++c)
      values.push_back(table->t.mean_metric(c, m, budget_epochs));
    tabbench::Ecdf ecdf(std::move(values));
    const auto& sorted = ecdf.sorted_samples();
    json j;
    j["metric"] = metric;
    j["budget_epochs"] = budget_epochs <= 0 ? table->t.max_epochs() : budget_epochs;
    j["n"] = sorted.size();
    j["min"] = sorted.front();
    j["median"] = tabbench::quantile_nearest_rank(sorted, 0.5);
    j["max"] = sorted.back();
    j["sorted_values"] = sorted;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_analyze_noise(const tb_table* table, int epoch, char** out_json) {
  if (!table || !out_json) return fail_arg("null argument");
  try {
    const int at = epoch <= 0 ? table->t.max_epochs() : epoch;
    std::vector<double> stds;
    stds.reserve(table->t.space().cardinality());
    for (uint64_t c = 0; c < table->t.space().cardinality(); ++c)
      stds.push_back(tabbench::noise_std(table->t, c, at));
    json j;
    j["epoch"] = at;
    j["n"] = stds.size();
    j["summary"] = {{"mean", tabbench::mean_of(stds)},
                    {"q25", tabbench::quantile_nearest_rank(stds, 0.25)},
                    {"median", tabbench::quantile_nearest_rank(stds, 0.5)},
                    {"q75", tabbench::quantile_nearest_rank(stds, 0.75)},
                    {"max", *std::max_element(stds.begin(), stds.end())}};
    j["noise_std"] = stds;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_analyze_rank_corr(const tb_table* table, const int* budgets, int n_budgets,
                         const double* top_fracs, int n_fracs, const char* selection,
                         char** out_json) {
  if (!table || !budgets || !top_fracs || !out_json) return fail_arg("null argument");
  try {
    const auto sel = selection && *selection ? tabbench::metric_from_name(selection)
                                             : tabbench::Metric::test;
    const auto result = tabbench::rank_corr_budgets(
        table->t, std::span<const int>(budgets, static_cast<size_t>(n_budgets)),
        std::span<const double>(top_fracs, static_cast<size_t>(n_fracs)), sel);
    json j;
    j["budgets"] = result.budgets;
    j["top_fracs"] = result.top_fracs;
    j["selection"] = tabbench::metric_name(sel);
    j["rho"] = result.rho;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_analyze_fanova(const tb_table* table, const char* metric, int max_order, double percentile,
                      char** out_json) {
  if (!table || !metric || !out_json) return fail_arg("null argument");
  try {
    std::optional<double> clamp;
    if (percentile > 0.0 && percentile < 100.0) clamp = percentile;
    const auto d =
        tabbench::fanova_exact(table->t, tabbench::metric_from_name(metric), max_order, clamp);
    json comps = json::array();
    for (const auto& c : d.components) {
      json names = json::array();
      for (int dim : c.dims) names.push_back(table->t.space().param(dim).name);
      comps.push_back(
          {{"dims", c.dims}, {"names", names}, {"variance", c.variance}, {"fraction", c.fraction}});
    }
    json j;
    j["metric"] = metric;
    j["max_order"] = max_order;
    if (clamp)
      j["percentile"] = *clamp;
    else
      j["percentile"] = nullptr;
    j["total_variance"] = d.total_variance;
    j["zero_variance"] = d.zero_variance;
    j["components"] = comps;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_analyze_neighbors(const tb_table* table, uint64_t config, char** out_json) {
  if (!table || !out_json) return fail_arg("null argument");
  try {
    const uint64_t base = config == UINT64_MAX ? table->t.global_optimum().first : config;
    const auto report = tabbench::local_neighborhood(table->t, base);
    const auto& space = table->t.space();
    const auto base_positions = space.decode(report.base_config);
    json changes = json::array();
    for (const auto& ch : report.changes) {
      const auto& param = space.param(ch.param);
      changes.push_back({{"param", param.name},
                         {"from", value_to_json(param.values[static_cast<size_t>(ch.old_pos)])},
                         {"to", value_to_json(param.values[static_cast<size_t>(ch.new_pos)])},
                         {"config", ch.config},
                         {"mean_test_mse", ch.mean_test},
                         {"relative_change", ch.relative_change}});
    }
    json base_params = json::object();
    for (int p = 0; p < space.num_params(); ++p)
      base_params[space.param(p).name] = value_to_json(
          space.param(p).values[static_cast<size_t>(base_positions[static_cast<size_t>(p)])]);
    json j;
    j["base_config"] = report.base_config;
    j["base_params"] = base_params;
    j["base_mean_test_mse"] = report.base_mean_test;
    j["changes"] = changes;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_analyze_cross_rank(const tb_table* const* tables, int n_tables, double top_frac,
                          char** out_json) {
  if (!tables || !out_json) return fail_arg("null argument");
  try {
    std::vector<const tabbench::BenchTable*> ptrs;
    json names = json::array();
    for (int i = 0; i < n_tables; ++i) {
      if (!tables[i]) throw std::domain_error("null table in list");
      ptrs.push_back(&tables[i]->t);
      names.push_back(tables[i]->t.dataset_name());
    }
    const auto rho = tabbench::cross_dataset_rank_corr(ptrs, top_frac);
    json j;
    j["top_frac"] = top_frac;
    j["datasets"] = names;
    j["rho"] = rho;
    return emit_json(j, out_json);
  } catch (...) {
    return map_current_exception();
  }
}

/* ---- races ------------------------------------------------------------------ */

void tb_run_options_init(tb_run_options* o) {
  if (!o) return;
  const tabbench::OptimizerOptions d;
  o->max_evals = 0;
  o->max_seconds = 0.0;
  o->incumbent_max_budget_only = 0;
  o->hb_eta = d.hb_eta;
  o->hb_min_budget = d.hb_min_budget;
  o->hb_max_budget = d.hb_max_budget;
  o->hb_bracket_limit = d.hb_bracket_limit;
  o->bohb_gamma = d.bohb_gamma;
  o->bohb_min_bandwidth = d.bohb_min_bandwidth;
  o->bohb_bandwidth_factor = d.bohb_bandwidth_factor;
  o->bohb_candidates = d.bohb_candidates;
  o->bohb_random_fraction = d.bohb_random_fraction;
  o->tpe_gamma = d.tpe_gamma;
  o->tpe_candidates = d.tpe_candidates;
  o->rf_trees = d.rf_trees;
  o->rf_max_evals_per_config = d.rf_max_evals_per_config;
  o->rf_random_interval = d.rf_random_interval;
  o->rf_local_starts = d.rf_local_starts;
  o->re_population = d.re_population;
  o->re_tournament = d.re_tournament;
  o->rl_learning_rate = d.rl_learning_rate;
  o->rl_baseline_momentum = d.rl_baseline_momentum;
}

int tb_run_once(const tb_table* table, const char* strategy, uint64_t seed,
                const tb_run_options* options, char** out_trace_json) {
  if (!table || !strategy || !options || !out_trace_json) return fail_arg("null argument");
  try {
    const auto trace =
        tabbench::run_once(table->t, tabbench::strategy_from_name(strategy), seed,
                           limits_from(*options), optimizer_from(*options));
    json steps = json::array();
    for (const auto& s : trace.steps)
      steps.push_back({{"config", s.config},
                       {"budget_epochs", s.budget_epochs},
                       {"valid_mse", s.valid_mse},
                       {"charged_seconds", s.charged_seconds},
                       {"clock_seconds", s.clock_seconds},
                       {"regret", s.regret}});
    json j;
    j["strategy"] = trace.strategy;
    j["seed"] = trace.seed;
    j["initial_regret"] = trace.initial_regret;
    j["final_regret"] = trace.final_regret();
    j["final_clock_seconds"] = trace.final_clock();
    j["n_steps"] = trace.steps.size();
    if (!trace.error.empty()) j["error"] = trace.error;
    j["steps"] = steps;
    return emit_json(j, out_trace_json);
  } catch (...) {
    return map_current_exception();
  }
}

int tb_compare(const tb_table* table, const char* strategies, int runs_per_strategy,
               uint64_t master_seed, const tb_run_options* options, const char* out_dir,
               char** out_summary_json) {
  if (!table || !strategies || !options) return fail_arg("null argument");
  try {
    tabbench::CompareOptions copts;
    copts.strategies = parse_strategies(strategies);
    copts.runs_per_strategy = runs_per_strategy;
    copts.master_seed = master_seed;
    copts.limits = limits_from(*options);
    copts.optimizer = optimizer_from(*options);
    const auto result = tabbench::compare(table->t, copts);
    if (out_dir && *out_dir) tabbench::write_compare_bundle(out_dir, table->t, copts, result);

    json summary = json::array();
    for (size_t si = 0; si < result.traces.size(); ++si) {
      std::vector<double> finals;
      int failed = 0;
      for (const auto& r : result.traces[si]) {
        finals.push_back(r.final_regret());
        if (!r.error.empty()) ++failed;
      }
      summary.push_back(
          {{"strategy", result.strategy_names[si]},
           {"runs", result.traces[si].size()},
           {"failed_runs", failed},
           {"final_regret_q25", tabbench::quantile_nearest_rank(finals, 0.25)},
           {"final_regret_median", tabbench::quantile_nearest_rank(finals, 0.5)},
           {"final_regret_q75", tabbench::quantile_nearest_rank(finals, 0.75)}});
    }
    json j;
    j["initial_regret"] = result.initial_regret;
    j["summary"] = summary;
    if (out_dir && *out_dir) j["out_dir"] = out_dir;
    if (out_summary_json) return emit_json(j, out_summary_json);
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

/* ---- report ------------------------------------------------------------------ */

int tb_report(const tb_table* table, const char* out_dir) {
  if (!table || !out_dir) return fail_arg("null argument");
  try {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto join = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    const auto& t = table->t;
    const uint64_t n = t.space().cardinality();
    json manifest;
    manifest["dataset_name"] = t.dataset_name();
    json sections = json::object();

    // Loss distribution over the whole grid.
    try {
      std::vector<double> valid_means, test_means;
      valid_means.reserve(n);
      test_means.reserve(n);
      for (uint64_t c = 0; c < n; ++c) {
        valid_means.push_back(t.mean_metric(c, tabbench::Metric::valid));
        test_means.push_back(t.mean_metric(c, tabbench::Metric::test));
      }
      tabbench::Ecdf valid_ecdf(valid_means), test_ecdf(test_means);
      std::string csv = "metric,value,cumulative_fraction\n";
      bool all_positive = true;
      std::vector<tabbench::PlotSeries> series;
      const std::pair<const char*, const tabbench::Ecdf*> parts[] = {{"valid", &valid_ecdf},
                                                                     {"test", &test_ecdf}};
      for (const auto& [label, ecdf] : parts) {
        tabbench::PlotSeries s;
        s.label = label;
        s.step = true;
        const auto& sorted = ecdf->sorted_samples();
        for (size_t i = 0; i < sorted.size(); ++i) {
          const double frac = static_cast<double>(i + 1) / static_cast<double>(sorted.size());
          csv += label;
          csv += ',';
          append_csv_number(csv, sorted[i]);
          csv += ',';
          append_csv_number(csv, frac);
          csv += '\n';
          s.x.push_back(sorted[i]);
          s.y.push_back(frac);
          if (sorted[i] <= 0.0) all_positive = false;
        }
        series.push_back(std::move(s));
      }
      tabbench::write_text_file(join("ecdf.csv"), csv);
      tabbench::PlotOptions po;
      po.title = "Mean loss across all configurations";
      po.x_label = "mean MSE";
      po.y_label = "fraction of configurations";
      po.log_x = all_positive;
      tabbench::write_text_file(join("ecdf.svg"), tabbench::render_line_plot(series, {}, po));
      sections["ecdf"] = {"ecdf.csv", "ecdf.svg"};
    } catch (const std::exception& e) {
      sections["ecdf"] = {{"error", e.what()}};
    }

    // Seed noise at the final epoch.
    try {
      std::vector<double> stds;
      stds.reserve(n);
      std::string csv = "config,noise_std\n";
      for (uint64_t c = 0; c < n; ++c) {
        const double s = tabbench::noise_std(t, c, t.max_epochs());
        stds.push_back(s);
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, c);
        csv.append(buf, res.ptr);
        csv += ',';
        append_csv_number(csv, s);
        csv += '\n';
      }
      tabbench::write_text_file(join("noise.csv"), csv);
      tabbench::Ecdf ecdf(stds);
      tabbench::PlotSeries s;
      s.label = "noise std";
      s.step = true;
      const auto& sorted = ecdf.sorted_samples();
      for (size_t i = 0; i < sorted.size(); ++i) {
        s.x.push_back(sorted[i]);
        s.y.push_back(static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
      }
      tabbench::PlotOptions po;
      po.title = "Seed noise of the validation loss (final epoch)";
      po.x_label = "per-config std across seeds";
      po.y_label = "fraction of configurations";
      tabbench::write_text_file(join("noise.svg"), tabbench::render_line_plot({s}, {}, po));
      sections["noise"] = {"noise.csv", "noise.svg"};
    } catch (const std::exception& e) {
      sections["noise"] = {{"error", e.what()}};
    }

    // Rank agreement between partial and full budgets.
    try {
      const auto budgets = tabbench::hb_budgets(3.0, 1, t.max_epochs());
      const std::vector<double> fracs = {0.1, 0.5, 1.0};
      const auto rc = tabbench::rank_corr_budgets(t, budgets, fracs);
      std::string csv = "top_frac,budget_epochs,spearman_rho\n";
      std::vector<tabbench::PlotSeries> series;
      for (size_t f = 0; f < rc.top_fracs.size(); ++f) {
        tabbench::PlotSeries s;
        s.label = "top " + std::to_string(static_cast<int>(rc.top_fracs[f] * 100.0)) + "%";
        for (size_t b = 0; b < rc.budgets.size(); ++b) {
          append_csv_number(csv, rc.top_fracs[f]);
          csv += ',';
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, rc.budgets[b]);
          csv.append(buf, res.ptr);
          csv += ',';
          append_csv_number(csv, rc.rho[f][b]);
          csv += '\n';
          s.x.push_back(rc.budgets[b]);
          s.y.push_back(rc.rho[f][b]);
        }
        series.push_back(std::move(s));
      }
      tabbench::write_text_file(join("rank_corr.csv"), csv);
      tabbench::PlotOptions po;
      po.title = "Rank agreement with the full budget";
      po.x_label = "budget (epochs)";
      po.y_label = "Spearman rho";
      po.log_x = true;
      tabbench::write_text_file(join("rank_corr.svg"), tabbench::render_line_plot(series, {}, po));
      sections["rank_corr"] = {"rank_corr.csv", "rank_corr.svg"};
    } catch (const std::exception& e) {
      sections["rank_corr"] = {{"error", e.what()}};
    }

    // Variance decomposition of the mean test loss.
    try {
      const auto d = tabbench::fanova_exact(t, tabbench::Metric::test, 2);
      std::vector<const tabbench::FanovaComponent*> sorted;
      for (const auto& c : d.components) sorted.push_back(&c);
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto* a, const auto* b) { return a->fraction > b->fraction; });
      std::string csv = "dims,fraction,variance\n";
      tabbench::PlotSeries s;
      s.label = "cumulative fraction";
      s.step = true;
      double acc = 0.0;
      for (size_t i = 0; i < sorted.size(); ++i) {
        std::string dims;
        for (size_t k = 0; k < sorted[i]->dims.size(); ++k) {
          if (k) dims += '+';
          dims += t.space().param(sorted[i]->dims[k]).name;
        }
        csv += dims;
        csv += ',';
        append_csv_number(csv, sorted[i]->fraction);
        csv += ',';
        append_csv_number(csv, sorted[i]->variance);
        csv += '\n';
        acc += sorted[i]->fraction;
        s.x.push_back(static_cast<double>(i + 1));
        s.y.push_back(acc);
      }
      tabbench::write_text_file(join("fanova.csv"), csv);
      tabbench::PlotOptions po;
      po.title = "Variance explained by the largest effects";
      po.x_label = "components, largest first";
      po.y_label = "cumulative fraction of variance";
      tabbench::write_text_file(join("fanova.svg"), tabbench::render_line_plot({s}, {}, po));
      sections["fanova"] = {"fanova.csv", "fanova.svg"};
    } catch (const std::exception& e) {
      sections["fanova"] = {{"error", e.what()}};
    }

    // One-value changes around the best configuration.
    try {
      const auto report = tabbench::local_neighborhood(t, t.global_optimum().first);
      std::string csv = "param,from,to,config,mean_test_mse,relative_change\n";
      for (const auto& ch : report.changes) {
        const auto& param = t.space().param(ch.param);
        csv += param.name;
        csv += ',';
        csv += param.values[static_cast<size_t>(ch.old_pos)].to_string();
        csv += ',';
        csv += param.values[static_cast<size_t>(ch.new_pos)].to_string();
        csv += ',';
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, ch.config);
        csv.append(buf, res.ptr);
        csv += ',';
        append_csv_number(csv, ch.mean_test);
        csv += ',';
        append_csv_number(csv, ch.relative_change);
        csv += '\n';
      }
      tabbench::write_text_file(join("neighbors.csv"), csv);
      sections["neighbors"] = {"neighbors.csv"};
    } catch (const std::exception& e) {
      sections["neighbors"] = {{"error", e.what()}};
    }

    manifest["sections"] = sections;
    tabbench::write_text_file(join("report.json"), manifest.dump(2) + "\n");
    return TB_OK;
  } catch (...) {
    return map_current_exception();
  }
}

}  // extern "C"
