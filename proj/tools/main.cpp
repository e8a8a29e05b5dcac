// Command-line front end. Everything goes through the C API in tabbench.h;
// this translation unit never touches the C++ core directly.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tabbench.h"

namespace {

struct TableHandle {
  tb_table* p = nullptr;
  TableHandle() = default;
  TableHandle(const TableHandle&) = delete;
  TableHandle& operator=(const TableHandle&) = delete;
  ~TableHandle() { tb_table_free(p); }
};

struct RngHandle {
  tb_rng* p = nullptr;
  explicit RngHandle(uint64_t seed) : p(tb_rng_new(seed)) {}
  RngHandle(const RngHandle&) = delete;
  RngHandle& operator=(const RngHandle&) = delete;
  ~RngHandle() { tb_rng_free(p); }
};

int report_error() {
  std::fprintf(stderr, "error: %s\n", tb_last_error());
  return 1;
}

int open_table(const std::string& path, TableHandle& handle) {
  if (tb_table_open(path.c_str(), &handle.p) != TB_OK) return report_error();
  return 0;
}

// Takes ownership of `text`; writes to `path` or stdout when path is empty.
int deliver(char* text, const std::string& path) {
  int rc = 0;
  if (path.empty()) {
    std::fputs(text, stdout);
    std::fputc('\n', stdout);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (out) out << text << '\n';
    if (!out) {
      std::fprintf(stderr, "error: cannot write '%s'\n", path.c_str());
      rc = 1;
    }
  }
  tb_string_free(text);
  return rc;
}

int print_table_summary(const tb_table* table, const std::string& path) {
  uint64_t checksum = 0;
  if (tb_table_checksum(table, &checksum) != TB_OK) return report_error();
  std::printf("%s: dataset '%s', %" PRIu64 " configs, %d seeds, %d epochs, checksum %016" PRIx64
              "\n",
              path.c_str(), tb_table_dataset_name(table), tb_table_cardinality(table),
              tb_table_n_seeds(table), tb_table_max_epochs(table), checksum);
  return 0;
}

// Run/compare options shared by both racing subcommands.
struct RunCommon {
  tb_run_options options;

  void attach(CLI::App* cmd) {
    tb_run_options_init(&options);
    cmd->add_option("--max-evals", options.max_evals, "evaluation cap (0 = none)")
        ->capture_default_str();
    cmd->add_option("--max-seconds", options.max_seconds, "simulated-clock cap (0 = none)")
        ->capture_default_str();
    cmd->add_flag("--incumbent-max-budget", options.incumbent_max_budget_only,
                  "only full-budget evaluations may become the incumbent");
    cmd->add_option("--hb-eta", options.hb_eta, "halving factor")->capture_default_str();
    cmd->add_option("--hb-min-budget", options.hb_min_budget, "lowest budget in epochs")
        ->capture_default_str();
    cmd->add_option("--hb-max-budget", options.hb_max_budget,
                    "highest budget in epochs (0 = table max)")
        ->capture_default_str();
    cmd->add_option("--hb-brackets", options.hb_bracket_limit,
                    "bracket executions before hb/bohb report finished")
        ->capture_default_str();
    cmd->add_option("--bohb-gamma", options.bohb_gamma, "good-fraction split")
        ->capture_default_str();
    cmd->add_option("--bohb-random-fraction", options.bohb_random_fraction,
                    "fraction of pure random suggestions")
        ->capture_default_str();
    cmd->add_option("--tpe-gamma", options.tpe_gamma, "good-fraction split")
        ->capture_default_str();
    cmd->add_option("--tpe-candidates", options.tpe_candidates, "acquisition sample count")
        ->capture_default_str();
    cmd->add_option("--rf-trees", options.rf_trees, "forest size")->capture_default_str();
    cmd->add_option("--re-population", options.re_population, "population size")
        ->capture_default_str();
    cmd->add_option("--re-tournament", options.re_tournament, "tournament size")
        ->capture_default_str();
    cmd->add_option("--rl-lr", options.rl_learning_rate, "policy learning rate")
        ->capture_default_str();
  }
};

struct GenSynthArgs {
  std::string space = "fcnet";
  std::string preset = "separable";
  std::string name;
  std::string out;
  int seeds = 4;
  int epochs = 100;
  double noise = 0.05;
  double decay = 0.6;
  uint64_t seed = 1;
};

struct GenGridArgs {
  std::string data;
  std::string space = "fcnet";
  std::string checkpoint;
  std::string name = "dataset";
  std::string out;
  int target = 0;
  int seeds = 4;
  int epochs = 100;
  int jobs = 1;
  double train_frac = 0.6;
  double valid_frac = 0.2;
  uint64_t split_seed = 1;
  uint64_t master_seed = 1;
  uint64_t limit = 0;
  bool timing_model = false;
  bool progress = false;
};

struct PathOutArgs {
  std::string path;
  std::string out;
};

struct QueryArgs {
  std::string path;
  uint64_t config = 0;
  uint64_t seed = 1;
  int budget = 0;
  int draws = 1;
};

struct EcdfArgs {
  std::string path;
  std::string metric = "valid";
  std::string out;
  int budget = 0;
};

struct NoiseArgs {
  std::string path;
  std::string out;
  int epoch = 0;
};

struct RankCorrArgs {
  std::string path;
  std::string selection = "test";
  std::string out;
  std::vector<int> budgets;
  std::vector<double> fracs = {0.01, 0.1, 0.25, 1.0};
};

struct FanovaArgs {
  std::string path;
  std::string metric = "test";
  std::string out;
  int order = 2;
  double percentile = 0.0;
};

struct NeighborsArgs {
  std::string path;
  std::string out;
  int64_t config = -1;
};

struct CrossRankArgs {
  std::vector<std::string> paths;
  std::string out;
  double frac = 0.1;
};

struct RunArgs {
  std::string path;
  std::string strategy = "rs";
  std::string out;
  uint64_t seed = 1;
  RunCommon common;
};

struct CompareArgs {
  std::string path;
  std::string strategies = "rs,tpe,bohb,rf,re,hb,rl";
  std::string out_dir;
  int runs = 16;
  uint64_t master_seed = 1;
  RunCommon common;
};

struct ReportArgs {
  std::string path;
  std::string out_dir;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular benchmark toolkit: build loss tables for a small "
               "regression network grid, analyze them, and race optimizers "
               "against them on a simulated clock."};
  app.require_subcommand(1);
  int rc = 0;

  // ---- gen-synth -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("gen-synth", "Generate a synthetic benchmark table");
    auto opt = std::make_shared<GenSynthArgs>();
    cmd->add_option("--space", opt->space, "'fcnet' or a JSON space spec path")
        ->capture_default_str();
    cmd->add_option("--preset", opt->preset, "separable, interacting, constant or random")
        ->capture_default_str();
    cmd->add_option("--seeds", opt->seeds, "seed repetitions per config")->capture_default_str();
    cmd->add_option("--epochs", opt->epochs, "epochs per training curve")->capture_default_str();
    cmd->add_option("--noise", opt->noise, "noise scale")->capture_default_str();
    cmd->add_option("--decay", opt->decay, "partial-budget loss inflation")->capture_default_str();
    cmd->add_option("--seed", opt->seed, "master seed")->capture_default_str();
    cmd->add_option("--name", opt->name, "dataset name stored in the table");
    cmd->add_option("-o,--out", opt->out, "output table path")->required();
    cmd->callback([opt, &rc] {
      TableHandle table;
      if (tb_gen_synth(opt->space.c_str(), opt->preset.c_str(), opt->seeds, opt->epochs,
                       opt->noise, opt->decay, opt->seed, opt->name.c_str(),
                       &table.p) != TB_OK) {
        rc = report_error();
        return;
      }
      if (tb_table_save(table.p, opt->out.c_str()) != TB_OK) {
        rc = report_error();
        return;
      }
      rc = print_table_summary(table.p, opt->out);
    });
  }

  // ---- gen-grid ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "gen-grid", "Train the full config grid on a dataset and build its table");
    auto opt = std::make_shared<GenGridArgs>();
    cmd->add_option("--data", opt->data, "delimited numeric data file with a header row")
        ->required();
    cmd->add_option("--target", opt->target, "target column index")->capture_default_str();
    cmd->add_option("--train-frac", opt->train_frac, "training split fraction")
        ->capture_default_str();
    cmd->add_option("--valid-frac", opt->valid_frac, "validation split fraction")
        ->capture_default_str();
    cmd->add_option("--split-seed", opt->split_seed, "shuffle seed for the split")
        ->capture_default_str();
    cmd->add_option("--space", opt->space, "'fcnet' or a JSON space spec path")
        ->capture_default_str();
    cmd->add_option("--seeds", opt->seeds, "seed repetitions per config")->capture_default_str();
    cmd->add_option("--epochs", opt->epochs, "training epochs")->capture_default_str();
    cmd->add_option("--master-seed", opt->master_seed, "seed for all training runs")
        ->capture_default_str();
    cmd->add_option("--jobs", opt->jobs, "worker threads")->capture_default_str();
    cmd->add_option("--checkpoint", opt->checkpoint,
                    "checkpoint directory (resumable, one file per config)");
    cmd->add_option("--limit", opt->limit, "stop after this many newly trained configs (0 = all)")
        ->capture_default_str();
    cmd->add_flag("--timing-model", opt->timing_model,
                  "store a deterministic runtime model instead of measured wall clock");
    cmd->add_flag("--progress", opt->progress, "progress lines on stderr");
    cmd->add_option("--name", opt->name, "dataset name stored in the table")
        ->capture_default_str();
    cmd->add_option("-o,--out", opt->out, "output table path");
    cmd->callback([opt, &rc] {
      tb_grid_params params;
      tb_grid_params_init(&params);
      params.data_path = opt->data.c_str();
      params.target_column = opt->target;
      params.train_frac = opt->train_frac;
      params.valid_frac = opt->valid_frac;
      params.split_seed = opt->split_seed;
      params.space = opt->space.c_str();
      params.n_seeds = opt->seeds;
      params.max_epochs = opt->epochs;
      params.master_seed = opt->master_seed;
      params.jobs = opt->jobs;
      params.checkpoint_dir = opt->checkpoint.empty() ? nullptr : opt->checkpoint.c_str();
      params.limit_new_configs = opt->limit;
      params.timing_model = opt->timing_model ? 1 : 0;
      params.dataset_name = opt->name.c_str();
      params.progress = opt->progress ? 1 : 0;
      TableHandle table;
      if (tb_gen_grid(&params, &table.p) != TB_OK) {
        rc = report_error();
        return;
      }
      if (!table.p) {
        std::printf("stopped at --limit %" PRIu64 "; partial results live in '%s'\n", opt->limit,
                    opt->checkpoint.c_str());
        return;
      }
      if (opt->out.empty()) {
        std::fprintf(stderr, "error: the grid finished but -o/--out was not given\n");
        rc = 1;
        return;
      }
      if (tb_table_save(table.p, opt->out.c_str()) != TB_OK) {
        rc = report_error();
        return;
      }
      rc = print_table_summary(table.p, opt->out);
    });
  }

  // ---- validate --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("validate", "Check a table file and print its metadata");
    auto opt = std::make_shared<PathOutArgs>();
    cmd->add_option("table", opt->path, "table file")->required();
    cmd->add_option("-o,--out", opt->out, "write the metadata JSON here instead of stdout");
    cmd->callback([opt, &rc] {
      TableHandle table;
      if ((rc = open_table(opt->path, table)) != 0) return;
      if (tb_table_validate(table.p) != TB_OK) {
        rc = report_error();
        return;
      }
      char* json = nullptr;
      if (tb_table_meta_json(table.p, &json) != TB_OK) {
        rc = report_error();
        return;
      }
      rc = deliver(json, opt->out);
    });
  }

  // ---- query -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("query", "Draw noisy objective evaluations from a table");
    auto opt = std::make_shared<QueryArgs>();
    cmd->add_option("table", opt->path, "table file")->required();
    cmd->add_option("--config", opt->config, "config index")->required();
    cmd->add_option("--budget", opt->budget, "budget in epochs (0 = full)")
        ->capture_default_str();
    cmd->add_option("--seed", opt->seed, "rng seed for the draws")->capture_default_str();
    cmd->add_option("--draws", opt->draws, "number of draws")->capture_default_str();
    cmd->callback([opt, &rc] {
      TableHandle table;
      if ((rc = open_table(opt->path, table)) != 0) return;
      char* json = nullptr;
      if (tb_config_json(table.p, opt->config, &json) != TB_OK) {
        rc = report_error();
        return;
      }
      std::fputs(json, stdout);
      std::fputc('\n', stdout);
      tb_string_free(json);
      const int budget = opt->budget > 0 ? opt->budget : tb_table_max_epochs(table.p);
      RngHandle rng(opt->seed);
      for (int i = 0; i < opt->draws; ++i) {
        double valid = 0.0, charge = 0.0;
        int64_t seed_drawn = 0;
        if (tb_query(table.p, opt->config, budget, rng.p, &valid, &charge, &seed_drawn) != TB_OK) {
          rc = report_error();
          return;
        }
        std::printf("{\"draw\": %d, \"budget_epochs\": %d, \"seed_drawn\": %" PRId64
                    ", \"valid_mse\": %.17g, \"charged_seconds\": %.17g}\n",
                    i, budget, seed_drawn, valid, charge);
      }
    });
  }

  // ---- analyze ----------------------------------------------------------------
  {
    auto* analyze = app.add_subcommand("analyze", "Table analyses (JSON results)");
    analyze->require_subcommand(1);

    {
      auto* cmd = analyze->add_subcommand("ecdf", "Distribution of per-config mean losses");
      auto opt = std::make_shared<EcdfArgs>();
      cmd->add_option("table", opt->path, "table file")->required();
      cmd->add_option("--metric", opt->metric, "train, valid, test, runtime or n_params")
          ->capture_default_str();
      cmd->add_option("--budget", opt->budget, "budget in epochs (0 = full)")
          ->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        TableHandle table;
        if ((rc = open_table(opt->path, table)) != 0) return;
        char* json = nullptr;
        if (tb_analyze_ecdf(table.p, opt->metric.c_str(), opt->budget, &json) != TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }

    {
      auto* cmd = analyze->add_subcommand("noise", "Seed noise of each config's validation loss");
      auto opt = std::make_shared<NoiseArgs>();
      cmd->add_option("table", opt->path, "table file")->required();
      cmd->add_option("--epoch", opt->epoch, "epoch (0 = final)")->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        TableHandle table;
        if ((rc = open_table(opt->path, table)) != 0) return;
        char* json = nullptr;
        if (tb_analyze_noise(table.p, opt->epoch, &json) != TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }

    {
      auto* cmd = analyze->add_subcommand(
          "rank-corr", "Rank agreement between partial and full training budgets");
      auto opt = std::make_shared<RankCorrArgs>();
      cmd->add_option("table", opt->path, "table file")->required();
      cmd->add_option("--budgets", opt->budgets, "budgets to compare (default: eta-3 ladder)")
          ->delimiter(',');
      cmd->add_option("--fracs", opt->fracs, "top fractions of configs")
          ->delimiter(',')
          ->capture_default_str();
      cmd->add_option("--selection", opt->selection, "rank the top set by 'test' or 'valid'")
          ->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        TableHandle table;
        if ((rc = open_table(opt->path, table)) != 0) return;
        std::vector<int> budgets = opt->budgets;
        if (budgets.empty()) {
          // eta-3 ladder down from the table maximum
          int b = tb_table_max_epochs(table.p);
          while (b >= 1) {
            budgets.insert(budgets.begin(), b);
            if (b == 1) break;
            b /= 3;
            if (b < 1) b = 1;
          }
        }
        char* json = nullptr;
        if (tb_analyze_rank_corr(table.p, budgets.data(), static_cast<int>(budgets.size()),
                                 opt->fracs.data(), static_cast<int>(opt->fracs.size()),
                                 opt->selection.c_str(), &json) != TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }

    {
      auto* cmd =
          analyze->add_subcommand("fanova", "Exact variance decomposition over the grid");
      auto opt = std::make_shared<FanovaArgs>();
      cmd->add_option("table", opt->path, "table file")->required();
      cmd->add_option("--metric", opt->metric, "metric to decompose")->capture_default_str();
      cmd->add_option("--order", opt->order, "maximum interaction order")->capture_default_str();
      cmd->add_option("--percentile", opt->percentile,
                      "clamp values above this percentile first (0 = off)")
          ->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        TableHandle table;
        if ((rc = open_table(opt->path, table)) != 0) return;
        char* json = nullptr;
        if (tb_analyze_fanova(table.p, opt->metric.c_str(), opt->order, opt->percentile,
                              &json) != TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }

    {
      auto* cmd =
          analyze->add_subcommand("neighbors", "Mean test loss of every one-value change");
      auto opt = std::make_shared<NeighborsArgs>();
      cmd->add_option("table", opt->path, "table file")->required();
      cmd->add_option("--config", opt->config, "base config (default: the table optimum)")
          ->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        TableHandle table;
        if ((rc = open_table(opt->path, table)) != 0) return;
        const uint64_t config =
            opt->config < 0 ? UINT64_MAX : static_cast<uint64_t>(opt->config);
        char* json = nullptr;
        if (tb_analyze_neighbors(table.p, config, &json) != TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }

    {
      auto* cmd = analyze->add_subcommand("cross-rank",
                                          "Rank agreement between tables sharing one space");
      auto opt = std::make_shared<CrossRankArgs>();
      cmd->add_option("tables", opt->paths, "two or more table files")
          ->required()
          ->expected(2, -1);
      cmd->add_option("--frac", opt->frac, "top fraction of configs per dataset")
          ->capture_default_str();
      cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
      cmd->callback([opt, &rc] {
        std::vector<std::unique_ptr<TableHandle>> tables;
        std::vector<const tb_table*> raw;
        for (const auto& path : opt->paths) {
          tables.push_back(std::make_unique<TableHandle>());
          if ((rc = open_table(path, *tables.back())) != 0) return;
          raw.push_back(tables.back()->p);
        }
        char* json = nullptr;
        if (tb_analyze_cross_rank(raw.data(), static_cast<int>(raw.size()), opt->frac, &json) !=
            TB_OK) {
          rc = report_error();
          return;
        }
        rc = deliver(json, opt->out);
      });
    }
  }

  // ---- run --------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("run", "Run one optimizer once and print its trace");
    auto opt = std::make_shared<RunArgs>();
    cmd->add_option("table", opt->path, "table file")->required();
    cmd->add_option("--strategy", opt->strategy, "rs, tpe, bohb, rf, re, hb or rl")
        ->capture_default_str();
    cmd->add_option("--seed", opt->seed, "run seed")->capture_default_str();
    cmd->add_option("-o,--out", opt->out, "output JSON path (default: stdout)");
    opt->common.attach(cmd);
    cmd->callback([opt, &rc] {
      TableHandle table;
      if ((rc = open_table(opt->path, table)) != 0) return;
      char* json = nullptr;
      if (tb_run_once(table.p, opt->strategy.c_str(), opt->seed, &opt->common.options, &json) !=
          TB_OK) {
        rc = report_error();
        return;
      }
      rc = deliver(json, opt->out);
    });
  }

  // ---- compare ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "compare", "Race several optimizers repeatedly and write the result bundle");
    auto opt = std::make_shared<CompareArgs>();
    cmd->add_option("table", opt->path, "table file")->required();
    cmd->add_option("--strategies", opt->strategies, "comma-separated strategy names")
        ->capture_default_str();
    cmd->add_option("--runs", opt->runs, "repetitions per strategy")->capture_default_str();
    cmd->add_option("--master-seed", opt->master_seed, "seed shared by the whole race")
        ->capture_default_str();
    cmd->add_option("--out-dir", opt->out_dir,
                    "directory for traces.csv, curves.csv, ecdf.csv, meta.json and SVGs")
        ->required();
    opt->common.attach(cmd);
    cmd->callback([opt, &rc] {
      TableHandle table;
      if ((rc = open_table(opt->path, table)) != 0) return;
      char* json = nullptr;
      if (tb_compare(table.p, opt->strategies.c_str(), opt->runs, opt->master_seed,
                     &opt->common.options, opt->out_dir.c_str(), &json) != TB_OK) {
        rc = report_error();
        return;
      }
      rc = deliver(json, "");
    });
  }

  // ---- report ---------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("report", "Write table diagnostics (CSV + SVG)");
    auto opt = std::make_shared<ReportArgs>();
    cmd->add_option("table", opt->path, "table file")->required();
    cmd->add_option("--out-dir", opt->out_dir, "output directory")->required();
    cmd->callback([opt, &rc] {
      TableHandle table;
      if ((rc = open_table(opt->path, table)) != 0) return;
      if (tb_report(table.p, opt->out_dir.c_str()) != TB_OK) {
        rc = report_error();
        return;
      }
      std::printf("report written to '%s'\n", opt->out_dir.c_str());
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return rc;
}
