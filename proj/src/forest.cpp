#include "tabbench/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tabbench {

namespace {

// First `k` elements of a partial Fisher-Yates shuffle of 0..d-1.
std::vector<int> sample_features(int d, int k, Rng& rng) {
  std::vector<int> feats(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) feats[static_cast<size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + rng.below_int(d - i);
    std::swap(feats[static_cast<size_t>(i)], feats[static_cast<size_t>(j)]);
  }
  feats.resize(static_cast<size_t>(k));
  return feats;
}

}  // namespace

struct RegressionForest::BuildScratch {
  // Indexed by position value; positions are small grid indices, so split
  // scanning accumulates per-value buckets instead of sorting the rows.
  std::vector<int> count;
  std::vector<double> sum;
  std::vector<double> sumsq;

  explicit BuildScratch(int max_value)
      : count(static_cast<size_t>(max_value) + 1),
        sum(static_cast<size_t>(max_value) + 1),
        sumsq(static_cast<size_t>(max_value) + 1) {}
};

int RegressionForest::build_node(Tree& tree, const std::vector<std::vector<int>>& x,
                                 const std::vector<double>& y, std::vector<int>& rows, int begin,
                                 int end, const Options& options, Rng& rng,
                                 BuildScratch& scratch) {
  const int n = end - begin;
  double sum = 0.0, sumsq = 0.0;
  for (int i = begin; i < end; ++i) {
    sum += y[static_cast<size_t>(rows[static_cast<size_t>(i)])];
    sumsq += y[static_cast<size_t>(rows[static_cast<size_t>(i)])] *
             y[static_cast<size_t>(rows[static_cast<size_t>(i)])];
  }
  const double node_sse = sumsq - sum * sum / n;

  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(Node{});
  tree.nodes[static_cast<size_t>(node_id)].value = sum / n;

  if (n <= options.min_leaf || node_sse <= 1e-12) return node_id;

  const int d = static_cast<int>(x[0].size());
  const int k = options.features_per_split > 0 ? std::min(options.features_per_split, d)
                                               : (d + 1) / 2;
  const auto feats = sample_features(d, k, rng);

  // Best (feature, threshold) by SSE reduction; scan thresholds in ascending
  // value order with per-value prefix sums. Ties keep the first candidate.
  double best_gain = 0.0;
  int best_feature = -1;
  int best_threshold = 0;
  for (int f : feats) {
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (int i = begin; i < end; ++i) {
      const int v = x[static_cast<size_t>(rows[static_cast<size_t>(i)])][static_cast<size_t>(f)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) continue;
    for (int v = lo; v <= hi; ++v) {
      scratch.count[static_cast<size_t>(v)] = 0;
      scratch.sum[static_cast<size_t>(v)] = 0.0;
      scratch.sumsq[static_cast<size_t>(v)] = 0.0;
    }
    for (int i = begin; i < end; ++i) {
      const int row = rows[static_cast<size_t>(i)];
      const int v = x[static_cast<size_t>(row)][static_cast<size_t>(f)];
      const double yi = y[static_cast<size_t>(row)];
      scratch.count[static_cast<size_t>(v)] += 1;
      scratch.sum[static_cast<size_t>(v)] += yi;
      scratch.sumsq[static_cast<size_t>(v)] += yi * yi;
    }
    int nl = 0;
    double lsum = 0.0, lsumsq = 0.0;
    for (int v = lo; v < hi; ++v) {
      if (scratch.count[static_cast<size_t>(v)] == 0) continue;
      nl += scratch.count[static_cast<size_t>(v)];
      lsum += scratch.sum[static_cast<size_t>(v)];
      lsumsq += scratch.sumsq[static_cast<size_t>(v)];
      if (nl == n) break;
      const int nr = n - nl;
      const double rsum = sum - lsum;
      const double rsumsq = sumsq - lsumsq;
      const double sse = (lsumsq - lsum * lsum / nl) + (rsumsq - rsum * rsum / nr);
      const double gain = node_sse - sse;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = v;
      }
    }
  }
  if (best_feature < 0) return node_id;

  const auto mid = std::partition(rows.begin() + begin, rows.begin() + end, [&](int row) {
    return x[static_cast<size_t>(row)][static_cast<size_t>(best_feature)] <= best_threshold;
  });
  const int split = static_cast<int>(mid - rows.begin());
  if (split == begin || split == end) return node_id;  // degenerate; keep as leaf

  tree.nodes[static_cast<size_t>(node_id)].feature = best_feature;
  tree.nodes[static_cast<size_t>(node_id)].threshold = best_threshold;
  const int left = build_node(tree, x, y, rows, begin, split, options, rng, scratch);
  tree.nodes[static_cast<size_t>(node_id)].left = left;
  const int right = build_node(tree, x, y, rows, split, end, options, rng, scratch);
  tree.nodes[static_cast<size_t>(node_id)].right = right;
  return node_id;
}

RegressionForest RegressionForest::fit(const std::vector<std::vector<int>>& x,
                                       const std::vector<double>& y, const Options& options,
                                       Rng& rng) {
  if (x.empty() || x.size() != y.size())
    throw std::domain_error("forest needs matching non-empty x and y");
  const size_t n = x.size();
  for (const auto& row : x) {
    if (row.size() != x[0].size()) throw std::domain_error("forest rows have mixed dimensions");
  }

  int max_value = 0;
  for (const auto& row : x)
    for (int v : row) {
      if (v < 0) throw std::domain_error("forest positions must be nonnegative");
      max_value = std::max(max_value, v);
    }

  RegressionForest forest;
  forest.trees_.resize(static_cast<size_t>(options.n_trees));
  std::vector<int> rows(n);
  BuildScratch scratch(max_value);
  for (auto& tree : forest.trees_) {
    for (size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.below(n));  // bootstrap
    build_node(tree, x, y, rows, 0, static_cast<int>(n), options, rng, scratch);
  }
  return forest;
}

RegressionForest::Prediction RegressionForest::predict(std::span<const int> x) const {
  double sum = 0.0, sumsq = 0.0;
  for (const auto& tree : trees_) {
    int node = 0;
    while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
      const auto& nd = tree.nodes[static_cast<size_t>(node)];
      node = x[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    const double v = tree.nodes[static_cast<size_t>(node)].value;
    sum += v;
    sumsq += v * v;
  }
  const double k = static_cast<double>(trees_.size());
  Prediction p;
  p.mean = sum / k;
  p.variance = std::max(0.0, sumsq / k - p.mean * p.mean);
  return p;
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  if (sigma < 1e-12) return 0.0;
  const double z = (best - mean) / sigma;
  const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  const double Phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return (best - mean) * Phi + sigma * phi;
}

}  // namespace tabbench
