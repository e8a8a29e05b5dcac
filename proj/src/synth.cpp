#include "tabbench/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "tabbench/error.hpp"

namespace tabbench {

namespace {

double hash_unit(uint64_t salt, uint64_t key) {
  return static_cast<double>(mix64(salt, key) >> 11) * 0x1.0p-53;
}

int64_t synth_param_count(std::span<const int> positions) {
  int64_t s = 0;
  for (int p : positions) s += p + 1;
  return 100 * s;
}

}  // namespace

BenchTable gen_synthetic(const ConfigSpace& space, const CellFn& value_fn, const CellFn& noise_fn,
                         int n_seeds, int max_epochs, Rng& rng, const SynthShape& shape,
                         const CellFn& runtime_fn, const std::string& dataset_name) {
  if (n_seeds < 1) throw std::domain_error("n_seeds must be positive");
  if (max_epochs < 1) throw std::domain_error("max_epochs must be positive");
  if (!value_fn || !noise_fn) throw std::domain_error("value_fn and noise_fn are required");

  const uint64_t n = space.cardinality();
  const int T = max_epochs;
  std::vector<EvalEntry> entries;
  entries.reserve(n);

  for (uint64_t cell = 0; cell < n; ++cell) {
    const auto positions = space.decode(cell);
    const double y = value_fn(positions);
    if (!std::isfinite(y) || y < 0.0)
      throw std::domain_error("value_fn must be finite and nonnegative (config " +
                              std::to_string(cell) + ")");
    const double nz = noise_fn(positions);
    if (!std::isfinite(nz) || nz < 0.0)
      throw std::domain_error("noise_fn must be finite and nonnegative (config " +
                              std::to_string(cell) + ")");

    const int64_t n_params = synth_param_count(positions);
    double runtime = runtime_fn ? runtime_fn(positions)
                                : 0.5 + 0.001 * static_cast<double>(n_params);
    if (!std::isfinite(runtime) || runtime <= 0.0)
      throw std::domain_error("runtime_fn must be finite and positive (config " +
                              std::to_string(cell) + ")");

    EvalEntry entry;
    entry.records.reserve(static_cast<size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
      SeedRecord rec;
      rec.seed = s;
      rec.n_params = n_params;
      rec.runtime_seconds = runtime;
      rec.train_curve.resize(static_cast<size_t>(T));
      rec.valid_curve.resize(static_cast<size_t>(T));
      for (int t = 0; t < T; ++t) {
        const double g = T > 1 ? static_cast<double>(T - 1 - t) / static_cast<double>(T - 1) : 0.0;
        const double level = y * (1.0 + shape.decay * g);
        const double scale = nz * (shape.noise_floor + (1.0 - shape.noise_floor) * g);
        rec.valid_curve[static_cast<size_t>(t)] = std::max(0.0, level + rng.normal() * scale);
        rec.train_curve[static_cast<size_t>(t)] =
            std::max(0.0, shape.train_factor * level + rng.normal() * scale * 0.5);
      }
      rec.final_test_mse = std::max(0.0, y + rng.normal() * nz * shape.test_noise);
      entry.records.push_back(std::move(rec));
    }
    entries.push_back(std::move(entry));
  }

  return BenchTable(space, max_epochs, dataset_name, std::move(entries));
}

BenchTable gen_synthetic_preset(const ConfigSpace& space, const std::string& preset, int n_seeds,
                                int max_epochs, double noise_scale, double decay, uint64_t seed,
                                const std::string& dataset_name) {
  const int d = space.num_params();
  const uint64_t salt = hash_str(0x5eed, preset);

  // Per-dimension positions mapped to [0, 1].
  auto unit = [&](std::span<const int> pos, int dim) {
    const int c = space.param(dim).cardinality();
    return c > 1 ? static_cast<double>(pos[static_cast<size_t>(dim)]) / (c - 1) : 0.5;
  };

  CellFn value_fn, noise_fn;
  SynthShape shape;
  shape.decay = decay;

  if (preset == "separable" || preset == "interacting") {
    std::vector<double> w(static_cast<size_t>(d)), m(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
      w[static_cast<size_t>(i)] = 0.5 + 1.5 * hash_unit(salt, 2 * static_cast<uint64_t>(i));
      m[static_cast<size_t>(i)] = hash_unit(salt, 2 * static_cast<uint64_t>(i) + 1);
    }
    const bool pairs = preset == "interacting";
    std::vector<double> wp;
    double base = 0.05;
    if (pairs) {
      for (int k = 0; 2 * k + 1 < d; ++k) {
        wp.push_back(0.2 + 0.8 * hash_unit(salt, 500 + static_cast<uint64_t>(k)));
        base += wp.back() / 4.0;  // keeps the surface nonnegative
      }
    }
    value_fn = [unit, w, m, wp, base, pairs](std::span<const int> pos) {
      double y = base;
      for (size_t i = 0; i < w.size(); ++i) {
        const double u = unit(pos, static_cast<int>(i));
        y += w[i] * (u - m[i]) * (u - m[i]);
      }
      if (pairs) {
        for (size_t k = 0; k < wp.size(); ++k) {
          const double a = unit(pos, static_cast<int>(2 * k));
          const double b = unit(pos, static_cast<int>(2 * k + 1));
          y += wp[k] * (a - 0.5) * (b - 0.5);
        }
      }
      return y;
    };
    noise_fn = [&space, salt, noise_scale](std::span<const int> pos) {
      const double u = hash_unit(salt ^ 0xbeefULL, space.encode(pos));
      return noise_scale * (0.25 + 0.75 * u);
    };
  } else if (preset == "constant") {
    value_fn = [](std::span<const int>) { return 1.0; };
    noise_fn = [](std::span<const int>) { return 0.0; };
    shape.decay = 0.0;
  } else if (preset == "random") {
    const uint64_t rsalt = mix64(salt, seed);
    value_fn = [&space, rsalt](std::span<const int> pos) {
      return 0.1 + hash_unit(rsalt, space.encode(pos));
    };
    noise_fn = [noise_scale](std::span<const int>) { return noise_scale; };
  } else {
    throw std::domain_error("unknown preset '" + preset +
                            "' (expected separable, interacting, constant or random)");
  }

  Rng rng(seed);
  return gen_synthetic(space, value_fn, noise_fn, n_seeds, max_epochs, rng, shape, nullptr,
                       dataset_name);
}

}  // namespace tabbench
