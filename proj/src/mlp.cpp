#include "tabbench/mlp.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tabbench {

int64_t mlp_param_count(int n_features, int h1, int h2) {
  return static_cast<int64_t>(n_features + 1) * h1 + static_cast<int64_t>(h1 + 1) * h2 + (h2 + 1);
}

double cosine_lr(double eta0, int epoch, int total) {
  return eta0 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * epoch / total));
}

namespace {

void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * rng.next_double() - 1.0) * bound;
  }
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative from pre-activation z and post-activation v = act(z).
Eigen::ArrayXXd activate_deriv(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v, Activation a) {
  if (a == Activation::relu) return (z.array() > 0.0).cast<double>();
  return 1.0 - v.array().square();
}

}  // namespace

MlpParams MlpParams::init(int d, int h1, int h2, Rng& rng) {
  MlpParams p;
  p.w1.resize(d, h1);
  p.b1 = Eigen::RowVectorXd::Zero(h1);
  p.w2.resize(h1, h2);
  p.b2 = Eigen::RowVectorXd::Zero(h2);
  p.w3.resize(h2);
  fill_uniform(p.w1, std::sqrt(6.0 / (d + h1)), rng);
  fill_uniform(p.w2, std::sqrt(6.0 / (h1 + h2)), rng);
  fill_uniform(p.w3, std::sqrt(6.0 / (h2 + 1)), rng);
  p.b3 = 0.0;
  return p;
}

DropoutMasks DropoutMasks::ones(Eigen::Index n, int h1, int h2) {
  DropoutMasks m;
  m.m1 = Eigen::MatrixXd::Ones(n, h1);
  m.m2 = Eigen::MatrixXd::Ones(n, h2);
  return m;
}

DropoutMasks DropoutMasks::sample(Eigen::Index n, int h1, int h2, double p1, double p2, Rng& rng) {
  auto fill = [&](Eigen::MatrixXd& m, Eigen::Index cols, double p) {
    m.resize(n, cols);
    if (p <= 0.0) {
      m.setOnes();
      return;
    }
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_double() < p ? 0.0 : keep;
    }
  };
  DropoutMasks m;
  fill(m.m1, h1, p1);
  fill(m.m2, h2, p2);
  return m;
}

namespace {

struct Forward {
  Eigen::MatrixXd z1, a1, a1d, z2, a2, a2d;  // a* pre-dropout, a*d post-dropout
  Eigen::VectorXd yhat;
};

Forward forward_pass(const MlpParams& p, Activation act1, Activation act2,
                     const Eigen::MatrixXd& x, const DropoutMasks& masks) {
  Forward f;
  f.z1 = (x * p.w1).rowwise() + p.b1;
  f.a1 = activate(f.z1, act1);
  f.a1d = f.a1.cwiseProduct(masks.m1);
  f.z2 = (f.a1d * p.w2).rowwise() + p.b2;
  f.a2 = activate(f.z2, act2);
  f.a2d = f.a2.cwiseProduct(masks.m2);
  f.yhat = (f.a2d * p.w3).array() + p.b3;
  return f;
}

}  // namespace

double mlp_loss(const MlpParams& p, Activation act1, Activation act2, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y, const DropoutMasks& masks) {
  const Forward f = forward_pass(p, act1, act2, x, masks);
  return (f.yhat - y).squaredNorm() / static_cast<double>(x.rows());
}

MlpParams mlp_gradients(const MlpParams& p, Activation act1, Activation act2,
                        const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const DropoutMasks& masks, double* loss_out) {
  const auto n = x.rows();
  const Forward f = forward_pass(p, act1, act2, x, masks);
  if (loss_out) *loss_out = (f.yhat - y).squaredNorm() / static_cast<double>(n);

  const Eigen::VectorXd dyhat = 2.0 / static_cast<double>(n) * (f.yhat - y);

  MlpParams g;
  g.w3 = f.a2d.transpose() * dyhat;
  g.b3 = dyhat.sum();

  const Eigen::MatrixXd dz2 =
      ((dyhat * p.w3.transpose()).cwiseProduct(masks.m2).array() * activate_deriv(f.z2, f.a2, act2))
          .matrix();
  g.w2 = f.a1d.transpose() * dz2;
  g.b2 = dz2.colwise().sum();

  const Eigen::MatrixXd dz1 =
      ((dz2 * p.w2.transpose()).cwiseProduct(masks.m1).array() * activate_deriv(f.z1, f.a1, act1))
          .matrix();
  g.w1 = x.transpose() * dz1;
  g.b1 = dz1.colwise().sum();
  return g;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct AdamState {
  MlpParams m, v;
  int64_t t = 0;

  static AdamState zeros(const MlpParams& shape) {
    auto zero_like = [](const MlpParams& p) {
      MlpParams z;
      z.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
      z.b1 = Eigen::RowVectorXd::Zero(p.b1.cols());
      z.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
      z.b2 = Eigen::RowVectorXd::Zero(p.b2.cols());
      z.w3 = Eigen::VectorXd::Zero(p.w3.size());
      z.b3 = 0.0;
      return z;
    };
    AdamState s;
    s.m = zero_like(shape);
    s.v = zero_like(shape);
    return s;
  }
};

template <typename T>
void adam_update_tensor(T& param, const T& grad, T& m, T& v, double lr, double c1, double c2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = (kBeta2 * v.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
  param = (param.array() - lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps)).matrix();
}

void adam_step(MlpParams& p, const MlpParams& g, AdamState& st, double lr) {
  ++st.t;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  adam_update_tensor(p.w1, g.w1, st.m.w1, st.v.w1, lr, c1, c2);
  adam_update_tensor(p.b1, g.b1, st.m.b1, st.v.b1, lr, c1, c2);
  adam_update_tensor(p.w2, g.w2, st.m.w2, st.v.w2, lr, c1, c2);
  adam_update_tensor(p.b2, g.b2, st.m.b2, st.v.b2, lr, c1, c2);
  adam_update_tensor(p.w3, g.w3, st.m.w3, st.v.w3, lr, c1, c2);
  st.m.b3 = kBeta1 * st.m.b3 + (1.0 - kBeta1) * g.b3;
  st.v.b3 = kBeta2 * st.v.b3 + (1.0 - kBeta2) * g.b3 * g.b3;
  p.b3 -= lr * (st.m.b3 / c1) / (std::sqrt(st.v.b3 / c2) + kAdamEps);
}

}  // namespace

SeedRecord train_one(const DatasetSplit& data, const TrainSpec& spec, TimingMode timing) {
  if (spec.batch_size < 1) throw std::domain_error("batch_size must be positive");
  if (spec.max_epochs < 1) throw std::domain_error("max_epochs must be positive");
  if (spec.dropout1 < 0.0 || spec.dropout1 >= 1.0 || spec.dropout2 < 0.0 || spec.dropout2 >= 1.0)
    throw std::domain_error("dropout rates must be in [0, 1)");
  if (!(spec.init_lr > 0.0)) throw std::domain_error("init_lr must be positive");
  if (spec.layer1_size < 1 || spec.layer2_size < 1)
    throw std::domain_error("layer sizes must be positive");

  const auto start = std::chrono::steady_clock::now();
  const auto d = static_cast<int>(data.train_x.cols());
  const auto n = data.train_x.rows();

  Rng rng(spec.seed);
  MlpParams params = MlpParams::init(d, spec.layer1_size, spec.layer2_size, rng);
  AdamState adam = AdamState::zeros(params);
  const DropoutMasks eval_train = DropoutMasks::ones(n, spec.layer1_size, spec.layer2_size);
  const DropoutMasks eval_valid =
      DropoutMasks::ones(data.valid_x.rows(), spec.layer1_size, spec.layer2_size);

  SeedRecord rec;
  rec.seed = static_cast<int64_t>(spec.seed);
  rec.n_params = mlp_param_count(d, spec.layer1_size, spec.layer2_size);
  rec.train_curve.reserve(static_cast<size_t>(spec.max_epochs));
  rec.valid_curve.reserve(static_cast<size_t>(spec.max_epochs));

  // Fallbacks in case the very first epoch already diverges.
  double last_train = mlp_loss(params, spec.act1, spec.act2, data.train_x, data.train_y, eval_train);
  double last_valid = mlp_loss(params, spec.act1, spec.act2, data.valid_x, data.valid_y, eval_valid);
  MlpParams last_good = params;

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  for (int epoch = 0; epoch < spec.max_epochs && !rec.diverged; ++epoch) {
    const double lr = spec.lr_schedule == LrSchedule::cosine
                          ? cosine_lr(spec.init_lr, epoch, spec.max_epochs)
                          : spec.init_lr;
    for (size_t i = order.size(); i-- > 1;) {
      const size_t j = rng.below(i + 1);
      std::swap(order[i], order[j]);
    }
    // Last partial mini-batch is kept.
    for (Eigen::Index off = 0; off < n; off += spec.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(spec.batch_size, n - off);
      Eigen::MatrixXd bx(bs, d);
      Eigen::VectorXd by(bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        bx.row(i) = data.train_x.row(order[static_cast<size_t>(off + i)]);
        by(i) = data.train_y(order[static_cast<size_t>(off + i)]);
      }
      const DropoutMasks masks =
          (spec.dropout1 > 0.0 || spec.dropout2 > 0.0)
              ? DropoutMasks::sample(bs, spec.layer1_size, spec.layer2_size, spec.dropout1,
                                     spec.dropout2, rng)
              : DropoutMasks::ones(bs, spec.layer1_size, spec.layer2_size);
      const MlpParams grads = mlp_gradients(params, spec.act1, spec.act2, bx, by, masks);
      adam_step(params, grads, adam, lr);
    }

    const double t_mse =
        mlp_loss(params, spec.act1, spec.act2, data.train_x, data.train_y, eval_train);
    const double v_mse =
        mlp_loss(params, spec.act1, spec.act2, data.valid_x, data.valid_y, eval_valid);
    if (!std::isfinite(t_mse) || !std::isfinite(v_mse)) {
      rec.diverged = true;
      break;
    }
    rec.train_curve.push_back(t_mse);
    rec.valid_curve.push_back(v_mse);
    last_train = t_mse;
    last_valid = v_mse;
    last_good = params;
  }

  while (rec.train_curve.size() < static_cast<size_t>(spec.max_epochs)) {
    rec.train_curve.push_back(last_train);
    rec.valid_curve.push_back(last_valid);
  }

  const DropoutMasks eval_test =
      DropoutMasks::ones(data.test_x.rows(), spec.layer1_size, spec.layer2_size);
  rec.final_test_mse =
      mlp_loss(last_good, spec.act1, spec.act2, data.test_x, data.test_y, eval_test);

  if (timing == TimingMode::model) {
    rec.runtime_seconds = 1.0 + 1e-6 * static_cast<double>(rec.n_params) * spec.max_epochs;
  } else {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    rec.runtime_seconds = std::max(dt.count(), 1e-9);
  }
  return rec;
}

}  // namespace tabbench
