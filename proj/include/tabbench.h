/* C interface to the tabular benchmark library.
 *
 * Conventions:
 *   - Every fallible call returns TB_OK (0) or a TB_ERR_* code; on failure
 *     tb_last_error() describes the problem (thread-local, valid until the
 *     next library call on the same thread).
 *   - Strings written through char** out parameters are heap-allocated and
 *     owned by the caller; release them with tb_string_free().
 *   - Handles are opaque and single-owner; free them with their *_free().
 */
#ifndef TABBENCH_H
#define TABBENCH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  TB_OK = 0,
  TB_ERR_IO = 1,        /* file missing, unreadable or unwritable */
  TB_ERR_PARSE = 2,     /* malformed table, spec or data file */
  TB_ERR_INTEGRITY = 3, /* structurally invalid table or checkpoint */
  TB_ERR_ARG = 4,       /* invalid argument or out-of-range index */
  TB_ERR_INTERNAL = 5   /* anything else */
};

typedef struct tb_table tb_table;
typedef struct tb_rng tb_rng;

const char* tb_version(void);
const char* tb_last_error(void);
void tb_string_free(char* s);

/* ---- deterministic random streams ------------------------------------- */

tb_rng* tb_rng_new(uint64_t seed);
void tb_rng_free(tb_rng* rng);

/* ---- benchmark tables --------------------------------------------------- */

int tb_table_open(const char* path, tb_table** out);
int tb_table_save(const tb_table* table, const char* path);
void tb_table_free(tb_table* table);

int tb_table_validate(const tb_table* table);
int tb_table_checksum(const tb_table* table, uint64_t* out);
uint64_t tb_table_cardinality(const tb_table* table);
int tb_table_max_epochs(const tb_table* table);
int tb_table_n_seeds(const tb_table* table);
const char* tb_table_dataset_name(const tb_table* table); /* owned by the table */
int tb_table_num_params(const tb_table* table);
/* dataset name, sizes, checksum and the full space description */
int tb_table_meta_json(const tb_table* table, char** out_json);

int tb_encode(const tb_table* table, const int* positions, int n, uint64_t* out);
int tb_decode(const tb_table* table, uint64_t config, int* out_positions, int n);
/* Pass out == NULL (capacity 0) to query the count alone. */
int tb_neighbors(const tb_table* table, uint64_t config, uint64_t* out, int capacity,
                 int* out_count);
/* {"config": ..., "params": {name: value, ...}} */
int tb_config_json(const tb_table* table, uint64_t config, char** out_json);

/* One noisy objective evaluation: draws a stored seed repetition uniformly,
 * reads its validation loss at the budget and charges the prorated runtime. */
int tb_query(const tb_table* table, uint64_t config, int budget_epochs, tb_rng* rng,
             double* out_valid_mse, double* out_charged_seconds, int64_t* out_seed_drawn);

/* metric: "train", "valid", "test", "runtime" or "n_params";
 * budget_epochs <= 0 means the final epoch. */
int tb_mean_metric(const tb_table* table, uint64_t config, const char* metric, int budget_epochs,
                   double* out);
int tb_global_optimum(const tb_table* table, uint64_t* out_config, double* out_mean_test);

/* ---- table generators ---------------------------------------------------- */

/* space: "fcnet" or a path to a JSON space spec.
 * preset: "separable", "interacting", "constant" or "random". */
int tb_gen_synth(const char* space, const char* preset, int n_seeds, int max_epochs,
                 double noise_scale, double decay, uint64_t seed, const char* dataset_name,
                 tb_table** out);

typedef struct tb_grid_params {
  const char* data_path; /* delimited numeric text file with a header row */
  char delimiter;        /* 0 auto-detects comma vs whitespace */
  int target_column;     /* index of the regression target column */
  double train_frac;
  double valid_frac; /* remainder of the rows becomes the test split */
  uint64_t split_seed;
  const char* space; /* "fcnet" (also the default when NULL) or a spec path */
  int n_seeds;
  int max_epochs;
  uint64_t master_seed;
  int jobs;
  const char* checkpoint_dir; /* NULL or empty: keep everything in memory */
  uint64_t limit_new_configs; /* stop after training this many new configs; 0 = all */
  int timing_model;           /* nonzero: deterministic runtime model, not wall clock */
  const char* dataset_name;
  int progress; /* nonzero: progress lines on stderr */
} tb_grid_params;

void tb_grid_params_init(tb_grid_params* p);

/* Trains the full grid (resuming from the checkpoint dir when given). When
 * the run stops early at limit_new_configs, returns TB_OK with *out == NULL
 * and leaves the partial results in the checkpoint dir. */
int tb_gen_grid(const tb_grid_params* params, tb_table** out);

/* ---- analyses (JSON results, free with tb_string_free) ------------------- */

/* ECDF of the per-config mean of a metric at a budget. */
int tb_analyze_ecdf(const tb_table* table, const char* metric, int budget_epochs, char** out_json);
/* Seed-noise std of every config's validation loss at an epoch (<= 0: final),
 * with distribution summary. */
int tb_analyze_noise(const tb_table* table, int epoch, char** out_json);
/* Spearman correlation between partial-budget and full-budget mean validation
 * loss over the best top_fracs of configs. selection: "test" or "valid". */
int tb_analyze_rank_corr(const tb_table* table, const int* budgets, int n_budgets,
                         const double* top_fracs, int n_fracs, const char* selection,
                         char** out_json);
/* Exact variance decomposition of the per-config mean metric over the grid,
 * up to interaction order max_order. percentile in (0, 100) clamps values
 * from above at that quantile first; anything else disables clamping. */
int tb_analyze_fanova(const tb_table* table, const char* metric, int max_order, double percentile,
                      char** out_json);
/* Mean test loss of every one-value change away from config
 * (UINT64_MAX: the table optimum). */
int tb_analyze_neighbors(const tb_table* table, uint64_t config, char** out_json);
/* Pairwise rank agreement between tables sharing one space. */
int tb_analyze_cross_rank(const tb_table* const* tables, int n_tables, double top_frac,
                          char** out_json);

/* ---- optimizer races ------------------------------------------------------ */

typedef struct tb_run_options {
  /* stop conditions: 0 disables a cap, at least one must be set */
  int max_evals;
  double max_seconds;
  /* nonzero: only full-budget evaluations may become the incumbent */
  int incumbent_max_budget_only;

  /* strategy meta-parameters (defaults from tb_run_options_init) */
  double hb_eta;
  int hb_min_budget;
  int hb_max_budget; /* 0: the table's max epochs */
  int hb_bracket_limit;
  double bohb_gamma;
  double bohb_min_bandwidth;
  double bohb_bandwidth_factor;
  int bohb_candidates;
  double bohb_random_fraction;
  double tpe_gamma;
  int tpe_candidates;
  int rf_trees;
  int rf_max_evals_per_config;
  int rf_random_interval;
  int rf_local_starts;
  int re_population;
  int re_tournament;
  double rl_learning_rate;
  double rl_baseline_momentum;
} tb_run_options;

void tb_run_options_init(tb_run_options* o);

/* strategy: "rs", "tpe", "bohb", "rf", "re", "hb" or "rl".
 * Returns the full trace as JSON. */
int tb_run_once(const tb_table* table, const char* strategy, uint64_t seed,
                const tb_run_options* options, char** out_trace_json);

/* strategies: comma-separated names. Races each strategy runs_per_strategy
 * times, writes traces.csv, curves.csv, ecdf.csv, meta.json, curves.svg and
 * ecdf.svg into out_dir, and returns the summary JSON. */
int tb_compare(const tb_table* table, const char* strategies, int runs_per_strategy,
               uint64_t master_seed, const tb_run_options* options, const char* out_dir,
               char** out_summary_json);

/* Writes table diagnostics (loss ECDF, seed noise, budget rank agreement,
 * variance decomposition, optimum neighborhood) as CSV + SVG into out_dir. */
int tb_report(const tb_table* table, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* TABBENCH_H */
