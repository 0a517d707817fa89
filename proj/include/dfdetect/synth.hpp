#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dfdetect/manifest.hpp"

namespace dfdetect {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_real = 500;
  std::size_t n_fake = 500;
  std::size_t dim = 8;
  double separation = 6.0;
  // Fraction of samples (per class, Bernoulli) whose features are drawn from
  // the opposite class's distribution; labels and counts are unchanged.
  double label_noise = 0.0;
  double train_fraction = 0.7;
  double val_fraction = 0.15;  // test takes the remainder
};

/// Unit direction separating the two synthetic classes: (1, ..., 1) / sqrt(dim).
std::vector<double> synth_direction(std::size_t dim);

/// Real samples ~ N(-(separation/2) u, I), fake ~ N(+(separation/2) u, I).
/// Sample ids are "synth-<index>"; labels appear in seeded random order and
/// splits are assigned per class so every split gets its share of both.
DatasetManifest synth_dataset(const SynthConfig& config);

}  // namespace dfdetect
