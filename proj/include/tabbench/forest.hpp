#pragma once

#include <span>
#include <vector>

#include "tabbench/rng.hpp"

namespace tabbench {

// Random forest regressor on integer grid positions. Each tree sees a
// bootstrap sample of the rows and a fresh random feature subset at every
// split; splits are "position <= threshold". The across-tree spread of the
// per-tree means is the predictive variance.
class RegressionForest {
 public:
  struct Options {
    int n_trees = 10;
    int min_leaf = 1;
    int features_per_split = 0;  // 0: ceil(d / 2)
  };

  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;  // population variance across trees
  };

  static RegressionForest fit(const std::vector<std::vector<int>>& x, const std::vector<double>& y,
                              const Options& options, Rng& rng);

  Prediction predict(std::span<const int> x) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    int threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  struct BuildScratch;  // per-value accumulation buffers shared down the recursion
  static int build_node(Tree& tree, const std::vector<std::vector<int>>& x,
                        const std::vector<double>& y, std::vector<int>& rows, int begin, int end,
                        const Options& options, Rng& rng, BuildScratch& scratch);

  std::vector<Tree> trees_;
};

// Expected improvement below the incumbent for a minimization problem;
// exactly 0 when the predictive variance is 0.
double expected_improvement(double mean, double variance, double best);

}  // namespace tabbench
