#pragma once

#include <functional>
#include <span>
#include <string>

#include "tabbench/rng.hpp"
#include "tabbench/space.hpp"
#include "tabbench/table.hpp"

namespace tabbench {

using CellFn = std::function<double(std::span<const int>)>;

struct SynthShape {
  // Multiplies the noiseless loss by (1 + decay * g) where g falls linearly
  // from 1 at the first epoch to 0 at the last, so partial-budget losses sit
  // above full-budget ones. 0 keeps curves flat.
  double decay = 0.0;
  // Noise scale shrinks linearly from noise_fn at the first epoch to
  // noise_floor * noise_fn at the last.
  double noise_floor = 0.25;
  // Train curves are offset below validation by this factor.
  double train_factor = 0.9;
  // Scale of the independent noise on the final test loss.
  double test_noise = 0.5;
};

// Builds a complete table from a noiseless loss surface plus per-config
// noise scales. value_fn must be finite and nonnegative everywhere. Every
// seed gets its own fixed noise realization; noise shrinks toward the final
// epoch so early budgets rank configs less reliably than late ones. When
// runtime_fn is empty the runtime is a deterministic affine function of a
// synthetic parameter count derived from the config's positions.
BenchTable gen_synthetic(const ConfigSpace& space, const CellFn& value_fn, const CellFn& noise_fn,
                         int n_seeds, int max_epochs, Rng& rng, const SynthShape& shape = {},
                         const CellFn& runtime_fn = nullptr,
                         const std::string& dataset_name = "synthetic");

// Named loss surfaces for the CLI and tests:
//   separable    additive quadratic bowl, heteroscedastic noise
//   interacting  the bowl plus pairwise interaction terms
//   constant     loss 1 everywhere, noiseless
//   random       hash-uniform losses in [0.1, 1.1]
BenchTable gen_synthetic_preset(const ConfigSpace& space, const std::string& preset, int n_seeds,
                                int max_epochs, double noise_scale, double decay, uint64_t seed,
                                const std::string& dataset_name);

}  // namespace tabbench
