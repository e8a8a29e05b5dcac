#include "tabbench/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tabbench {

namespace {

double lambda_max(ParamKind kind, int card) {
  if (kind == ParamKind::categorical)
    return static_cast<double>(card - 1) / static_cast<double>(card);
  return 0.99;
}

// Column-stochastic kernel matrix, [value * card + center].
std::vector<double> kernel_matrix(ParamKind kind, int card, double lambda) {
  std::vector<double> m(static_cast<size_t>(card) * static_cast<size_t>(card));
  if (card == 1) {
    m[0] = 1.0;
    return m;
  }
  if (kind == ParamKind::categorical) {
    const double off = lambda / static_cast<double>(card - 1);
    for (int v = 0; v < card; ++v) {
      for (int c = 0; c < card; ++c)
        m[static_cast<size_t>(v) * card + c] = v == c ? 1.0 - lambda : off;
    }
    return m;
  }
  // Ordinal: geometric decay in the position distance, renormalized per
  // center because the support is finite.
  for (int c = 0; c < card; ++c) {
    double sum = 0.0;
    for (int v = 0; v < card; ++v) {
      const double k =
          v == c ? 1.0 - lambda : 0.5 * (1.0 - lambda) * std::pow(lambda, std::abs(v - c));
      m[static_cast<size_t>(v) * card + c] = k;
      sum += k;
    }
    for (int v = 0; v < card; ++v) m[static_cast<size_t>(v) * card + c] /= sum;
  }
  return m;
}

// One kernel column computed on the fly (used for sampling with widened
// bandwidths without building the whole matrix).
void kernel_column(ParamKind kind, int card, double lambda, int center, std::vector<double>& col) {
  col.assign(static_cast<size_t>(card), 0.0);
  if (card == 1) {
    col[0] = 1.0;
    return;
  }
  if (kind == ParamKind::categorical) {
    const double off = lambda / static_cast<double>(card - 1);
    for (int v = 0; v < card; ++v) col[static_cast<size_t>(v)] = v == center ? 1.0 - lambda : off;
    return;
  }
  double sum = 0.0;
  for (int v = 0; v < card; ++v) {
    const double k = v == center ? 1.0 - lambda
                                 : 0.5 * (1.0 - lambda) * std::pow(lambda, std::abs(v - center));
    col[static_cast<size_t>(v)] = k;
    sum += k;
  }
  for (double& v : col) v /= sum;
}

void check_samples(const ConfigSpace& space, const std::vector<std::vector<int>>& samples) {
  if (samples.empty()) throw std::domain_error("KDE needs at least one sample");
  for (const auto& s : samples) {
    if (s.size() != static_cast<size_t>(space.num_params()))
      throw std::domain_error("KDE sample has wrong dimension");
    for (int d = 0; d < space.num_params(); ++d) {
      if (s[static_cast<size_t>(d)] < 0 || s[static_cast<size_t>(d)] >= space.param(d).cardinality())
        throw std::domain_error("KDE sample position out of range");
    }
  }
}

std::vector<double> bandwidth_candidates(double lo, double hi, int count) {
  std::vector<double> out;
  if (count < 2 || hi <= lo) {
    out.push_back(hi);
    return out;
  }
  for (int i = 0; i < count; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

int draw_from(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

GridKde GridKde::fit(const ConfigSpace& space, std::vector<std::vector<int>> samples,
                     const KdeOptions& options) {
  check_samples(space, samples);
  const int d = space.num_params();

  GridKde kde;
  kde.min_bandwidth_ = options.min_bandwidth;
  for (int i = 0; i < d; ++i) {
    kde.cards_.push_back(space.param(i).cardinality());
    kde.kinds_.push_back(space.param(i).kind);
  }
  kde.samples_ = std::move(samples);
  kde.lambda_.resize(static_cast<size_t>(d));
  kde.kmat_.resize(static_cast<size_t>(d));

  // Start from the widest kernels.
  for (int i = 0; i < d; ++i) {
    const double hi = lambda_max(kde.kinds_[static_cast<size_t>(i)], kde.cards_[static_cast<size_t>(i)]);
    kde.lambda_[static_cast<size_t>(i)] = hi;
    kde.kmat_[static_cast<size_t>(i)] =
        kernel_matrix(kde.kinds_[static_cast<size_t>(i)], kde.cards_[static_cast<size_t>(i)], hi);
  }

  // Leave-one-out bandwidth selection on a deterministic strided subsample.
  const size_t n = kde.samples_.size();
  const size_t cap = options.cv_max_points > 0 ? static_cast<size_t>(options.cv_max_points) : n;
  std::vector<size_t> cv_idx;
  if (n <= cap) {
    for (size_t i = 0; i < n; ++i) cv_idx.push_back(i);
  } else {
    for (size_t i = 0; i < cap; ++i) cv_idx.push_back(i * n / cap);
  }
  const size_t m = cv_idx.size();
  if (m >= 2) {
    // Pairwise kernel products at the current bandwidths.
    std::vector<double> prod(m * m, 1.0);
    auto refresh_dim = [&](int dim, const std::vector<double>& mat, bool divide) {
      const int card = kde.cards_[static_cast<size_t>(dim)];
      for (size_t i = 0; i < m; ++i) {
        const int vi = kde.samples_[cv_idx[i]][static_cast<size_t>(dim)];
        for (size_t j = 0; j < m; ++j) {
          const int vj = kde.samples_[cv_idx[j]][static_cast<size_t>(dim)];
          const double k = mat[static_cast<size_t>(vi) * card + vj];
          if (divide) {
            prod[i * m + j] /= k;
          } else {
            prod[i * m + j] *= k;
          }
        }
      }
    };
    for (int dim = 0; dim < d; ++dim) refresh_dim(dim, kde.kmat_[static_cast<size_t>(dim)], false);

    for (int pass = 0; pass < std::max(1, options.cv_passes); ++pass) {
      for (int dim = 0; dim < d; ++dim) {
        const int card = kde.cards_[static_cast<size_t>(dim)];
        if (card == 1) continue;
        const double hi = lambda_max(kde.kinds_[static_cast<size_t>(dim)], card);
        const double lo = std::min(options.min_bandwidth, hi);
        refresh_dim(dim, kde.kmat_[static_cast<size_t>(dim)], true);

        double best_ll = -std::numeric_limits<double>::infinity();
        double best_lambda = kde.lambda_[static_cast<size_t>(dim)];
        std::vector<double> best_mat;
        for (double cand : bandwidth_candidates(lo, hi, options.cv_grid)) {
          const auto mat = kernel_matrix(kde.kinds_[static_cast<size_t>(dim)], card, cand);
          double ll = 0.0;
          for (size_t i = 0; i < m; ++i) {
            const int vi = kde.samples_[cv_idx[i]][static_cast<size_t>(dim)];
            double s = 0.0;
            for (size_t j = 0; j < m; ++j) {
              if (j == i) continue;
              const int vj = kde.samples_[cv_idx[j]][static_cast<size_t>(dim)];
              s += prod[i * m + j] * mat[static_cast<size_t>(vi) * card + vj];
            }
            ll += std::log(s / static_cast<double>(m - 1));
          }
          if (ll > best_ll) {
            best_ll = ll;
            best_lambda = cand;
            best_mat = mat;
          }
        }
        kde.lambda_[static_cast<size_t>(dim)] = best_lambda;
        kde.kmat_[static_cast<size_t>(dim)] = std::move(best_mat);
        refresh_dim(dim, kde.kmat_[static_cast<size_t>(dim)], false);
      }
    }
  }
  return kde;
}

double GridKde::density(std::span<const int> x) const {
  const size_t d = cards_.size();
  if (x.size() != d) throw std::domain_error("KDE query has wrong dimension");
  for (size_t i = 0; i < d; ++i) {
    if (x[i] < 0 || x[i] >= cards_[i]) throw std::domain_error("KDE query position out of range");
  }
  double sum = 0.0;
  for (const auto& s : samples_) {
    double p = 1.0;
    for (size_t i = 0; i < d; ++i)
      p *= kmat_[i][static_cast<size_t>(x[i]) * cards_[i] + s[i]];
    sum += p;
  }
  return sum / static_cast<double>(samples_.size());
}

double GridKde::log_density(std::span<const int> x) const { return std::log(density(x)); }

std::vector<int> GridKde::sample(Rng& rng, double bandwidth_factor) const {
  const size_t d = cards_.size();
  const auto& center = samples_[rng.below(samples_.size())];
  std::vector<int> out(d);
  std::vector<double> col;
  for (size_t i = 0; i < d; ++i) {
    const double hi = lambda_max(kinds_[i], cards_[i]);
    const double lo = std::min(min_bandwidth_, hi);
    const double widened = std::clamp(lambda_[i] * bandwidth_factor, lo, hi);
    kernel_column(kinds_[i], cards_[i], widened, center[i], col);
    out[i] = draw_from(col, rng);
  }
  return out;
}

UnivariateKde UnivariateKde::fit(const ConfigSpace& space,
                                 const std::vector<std::vector<int>>& samples,
                                 const KdeOptions& options) {
  check_samples(space, samples);
  const int d = space.num_params();
  const size_t n = samples.size();

  UnivariateKde kde;
  kde.lambda_.resize(static_cast<size_t>(d));
  kde.dens_.resize(static_cast<size_t>(d));
  for (int dim = 0; dim < d; ++dim) {
    const int card = space.param(dim).cardinality();
    const ParamKind kind = space.param(dim).kind;
    kde.cards_.push_back(card);

    std::vector<double> hist(static_cast<size_t>(card), 0.0);
    for (const auto& s : samples) hist[static_cast<size_t>(s[static_cast<size_t>(dim)])] += 1.0;

    const double hi = lambda_max(kind, card);
    const double lo = std::min(options.min_bandwidth, hi);
    double best_lambda = hi;
    if (card > 1 && n >= 2) {
      double best_ll = -std::numeric_limits<double>::infinity();
      for (double cand : bandwidth_candidates(lo, hi, options.cv_grid)) {
        const auto mat = kernel_matrix(kind, card, cand);
        double ll = 0.0;
        for (int v = 0; v < card; ++v) {
          if (hist[static_cast<size_t>(v)] == 0.0) continue;
          double s = 0.0;
          for (int u = 0; u < card; ++u)
            s += hist[static_cast<size_t>(u)] * mat[static_cast<size_t>(v) * card + u];
          s -= mat[static_cast<size_t>(v) * card + v];  // leave the point itself out
          ll += hist[static_cast<size_t>(v)] * std::log(s / static_cast<double>(n - 1));
        }
        if (ll > best_ll) {
          best_ll = ll;
          best_lambda = cand;
        }
      }
    }
    kde.lambda_[static_cast<size_t>(dim)] = best_lambda;

    const auto mat = kernel_matrix(kind, card, best_lambda);
    std::vector<double> dens(static_cast<size_t>(card), 0.0);
    for (int v = 0; v < card; ++v) {
      double s = 0.0;
      for (int u = 0; u < card; ++u)
        s += hist[static_cast<size_t>(u)] * mat[static_cast<size_t>(v) * card + u];
      dens[static_cast<size_t>(v)] = s / static_cast<double>(n);
    }
    kde.dens_[static_cast<size_t>(dim)] = std::move(dens);
  }
  return kde;
}

double UnivariateKde::density(std::span<const int> x) const {
  return std::exp(log_density(x));
}

double UnivariateKde::log_density(std::span<const int> x) const {
  if (x.size() != cards_.size()) throw std::domain_error("KDE query has wrong dimension");
  double ll = 0.0;
  for (size_t i = 0; i < cards_.size(); ++i) {
    if (x[i] < 0 || x[i] >= cards_[i]) throw std::domain_error("KDE query position out of range");
    ll += std::log(dens_[i][static_cast<size_t>(x[i])]);
  }
  return ll;
}

std::vector<int> UnivariateKde::sample(Rng& rng) const {
  std::vector<int> out(cards_.size());
  for (size_t i = 0; i < cards_.size(); ++i) out[i] = draw_from(dens_[i], rng);
  return out;
}

uint64_t acquisition_argmax(const ConfigSpace& space, const GridKde& good, const GridKde& bad,
                            int n_candidates, double bandwidth_factor, Rng& rng) {
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best;
  for (int i = 0; i < n_candidates; ++i) {
    const auto cand = good.sample(rng, bandwidth_factor);
    const double score = good.log_density(cand) - bad.log_density(cand);
    if (score > best_score) {
      best_score = score;
      best = cand;
    }
  }
  return space.encode(best);
}

uint64_t acquisition_argmax(const ConfigSpace& space, const UnivariateKde& good,
                            const UnivariateKde& bad, int n_candidates, Rng& rng) {
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best;
  for (int i = 0; i < n_candidates; ++i) {
    const auto cand = good.sample(rng);
    const double score = good.log_density(cand) - bad.log_density(cand);
    if (score > best_score) {
      best_score = score;
      best = cand;
    }
  }
  return space.encode(best);
}

}  // namespace tabbench
