#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabbench/rng.hpp"
#include "tabbench/space.hpp"

namespace tabbench {

// One training run of one configuration with one seed.
struct SeedRecord {
  int64_t seed = 0;
  std::vector<double> train_curve;  // full-pass train MSE after each epoch
  std::vector<double> valid_curve;  // full-pass validation MSE after each epoch
  double final_test_mse = 0.0;
  double runtime_seconds = 0.0;
  int64_t n_params = 0;
  bool diverged = false;
};

// All seed repetitions of one configuration.
struct EvalEntry {
  std::vector<SeedRecord> records;
};

enum class Metric { train, valid, test, runtime, n_params };

Metric metric_from_name(const std::string& name);
const char* metric_name(Metric m);

struct QueryResult {
  double valid_mse = 0.0;
  double runtime_charged_seconds = 0.0;
  int64_t seed_drawn = 0;
  int budget_epochs = 0;
};

// Simulated cost of an evaluation stopped at `budget` of `max_epochs`.
inline double charged_seconds(double runtime_seconds, int budget, int max_epochs) {
  return (runtime_seconds * static_cast<double>(budget)) / static_cast<double>(max_epochs);
}

// Immutable benchmark table: one EvalEntry per point of the config grid,
// indexed by the mixed-radix config index.
class BenchTable {
 public:
  BenchTable(ConfigSpace space, int max_epochs, std::string dataset_name,
             std::vector<EvalEntry> entries);

  const ConfigSpace& space() const { return space_; }
  int max_epochs() const { return max_epochs_; }
  const std::string& dataset_name() const { return dataset_name_; }
  int n_seeds() const { return entries_.empty() ? 0 : static_cast<int>(entries_[0].records.size()); }
  const EvalEntry& entry(uint64_t config) const;

  // Draws one stored seed uniformly and reads its validation loss at the
  // requested budget; the charge is the stored runtime prorated by budget.
  QueryResult query(uint64_t config, int budget_epochs, Rng& rng) const;

  // Mean across seed records. budget_epochs <= 0 means the final epoch;
  // test and n_params ignore the budget.
  double mean_metric(uint64_t config, Metric m, int budget_epochs = 0) const;

  // Config with the lowest mean final test MSE; ties go to the lower index.
  std::pair<uint64_t, double> global_optimum() const;

  // Mean final test MSE for every config (precomputed at construction).
  const std::vector<double>& mean_test_all() const;

  // Throws IntegrityError on any structural violation.
  void validate() const;

  // Order-sensitive digest of the table contents (not of the file bytes).
  uint64_t checksum() const;

  void save(const std::string& path) const;
  static BenchTable load(const std::string& path);

 private:
  void check_config(uint64_t config) const;

  ConfigSpace space_;
  int max_epochs_;
  std::string dataset_name_;
  std::vector<EvalEntry> entries_;
  std::vector<double> mean_test_cache_;
};

struct SpaceSpec {
  ConfigSpace space;
  std::optional<int> max_epochs;
  std::optional<int> n_seeds;
  std::optional<std::string> dataset_name;
};

// Accepts the builtin space name "fcnet" or a path to a JSON space spec:
// a table header without entries, of which only "space" is required.
SpaceSpec load_space_spec(const std::string& path_or_name);

}  // namespace tabbench
