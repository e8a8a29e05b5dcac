#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tabbench/dataset.hpp"
#include "tabbench/mlp.hpp"
#include "tabbench/space.hpp"
#include "tabbench/table.hpp"

namespace tabbench {

// Builds a TrainSpec from a grid point. The space must name exactly these
// parameters (any order): init_lr, batch_size, lr_schedule, activation1,
// activation2, layer1_size, layer2_size, dropout1, dropout2.
TrainSpec spec_from_positions(const ConfigSpace& space, std::span<const int> positions,
                              int max_epochs, uint64_t seed);

struct GridGenOptions {
  int n_seeds = 4;
  int max_epochs = 100;
  int jobs = 1;
  std::string checkpoint_dir;  // empty: run in memory only
  TimingMode timing = TimingMode::measured;
  std::string dataset_name = "dataset";
  // For tests and staged runs: stop after this many newly trained configs
  // (0 = no limit). An early stop leaves results in the checkpoint dir and
  // returns nullopt.
  uint64_t limit_new_configs = 0;
  std::function<void(uint64_t done, uint64_t total)> progress;
};

// Trains every configuration of the grid over n_seeds repetitions. With a
// checkpoint dir, each finished config is persisted immediately and resumes
// skip configs already on disk; the run seed of (config, repetition) is
// derived from master_seed alone, so an interrupted-and-resumed run equals
// an uninterrupted one.
std::optional<BenchTable> run_grid(const ConfigSpace& space, const DatasetSplit& data,
                                   const GridGenOptions& options, uint64_t master_seed);

// Assembles a table from a complete checkpoint directory.
BenchTable finalize_checkpoint(const std::string& checkpoint_dir);

}  // namespace tabbench
