#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tabbench/dataset.hpp"
#include "tabbench/rng.hpp"
#include "tabbench/table.hpp"

namespace tabbench {

enum class Activation { relu, tanh };
enum class LrSchedule { cosine, constant };

struct TrainSpec {
  double init_lr = 0.001;
  int batch_size = 32;
  LrSchedule lr_schedule = LrSchedule::cosine;
  Activation act1 = Activation::relu;
  Activation act2 = Activation::relu;
  int layer1_size = 16;
  int layer2_size = 16;
  double dropout1 = 0.0;
  double dropout2 = 0.0;
  int max_epochs = 100;
  uint64_t seed = 0;
};

// Dense weights of dense(h1) -> dense(h2) -> dense(1, linear).
int64_t mlp_param_count(int n_features, int h1, int h2);

// Per-epoch cosine decay; reaches exactly 0 at epoch == total.
double cosine_lr(double eta0, int epoch, int total);

struct MlpParams {
  Eigen::MatrixXd w1;     // d x h1
  Eigen::RowVectorXd b1;  // h1
  Eigen::MatrixXd w2;     // h1 x h2
  Eigen::RowVectorXd b2;  // h2
  Eigen::VectorXd w3;     // h2
  double b3 = 0.0;

  // Glorot-style uniform init, biases zero.
  static MlpParams init(int d, int h1, int h2, Rng& rng);
};

// Inverted dropout masks: entries are 0 or 1/(1-p), applied at train time
// only so evaluation needs no rescaling.
struct DropoutMasks {
  Eigen::MatrixXd m1, m2;  // n x h1, n x h2
  static DropoutMasks ones(Eigen::Index n, int h1, int h2);
  static DropoutMasks sample(Eigen::Index n, int h1, int h2, double p1, double p2, Rng& rng);
};

double mlp_loss(const MlpParams& p, Activation a1, Activation a2, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y, const DropoutMasks& masks);

// Analytic gradients of mlp_loss with the same masks held fixed.
MlpParams mlp_gradients(const MlpParams& p, Activation a1, Activation a2, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y, const DropoutMasks& masks,
                        double* loss_out = nullptr);

enum class TimingMode { measured, model };

// Full Adam training run of one configuration with one seed. Non-finite
// epoch losses stop training: the last finite curve values are carried
// forward and the record is flagged as diverged. With TimingMode::model the
// stored runtime is a deterministic affine function of the parameter count.
SeedRecord train_one(const DatasetSplit& data, const TrainSpec& spec,
                     TimingMode timing = TimingMode::measured);

}  // namespace tabbench
