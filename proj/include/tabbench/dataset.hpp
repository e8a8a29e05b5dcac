#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tabbench/rng.hpp"

namespace tabbench {

// Numeric table parsed from a delimited text file with a header row.
struct RawTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd cells;  // one row per data line
};

// delimiter 0 auto-detects comma vs whitespace from the header line.
RawTable read_delimited(const std::string& path, char delimiter = 0);

struct DatasetSplit {
  Eigen::MatrixXd train_x, valid_x, test_x;  // normalized features
  Eigen::VectorXd train_y, valid_y, test_y;  // normalized targets
  std::vector<std::string> feature_names;
  Eigen::VectorXd feature_means, feature_scales;
  double target_mean = 0.0;
  double target_scale = 1.0;
};

// Shuffles rows, splits train/valid/test by the given fractions (remainder
// is test), drops features constant over the whole table, and normalizes
// features and target by training-split mean and variance.
DatasetSplit prepare_dataset(const RawTable& raw, int target_column, double train_frac,
                             double valid_frac, Rng& rng);

inline double denormalize_target(const DatasetSplit& s, double y_normalized) {
  return y_normalized * s.target_scale + s.target_mean;
}

}  // namespace tabbench
