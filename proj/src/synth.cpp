#include "dfdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfdetect/error.hpp"
#include "dfdetect/random.hpp"

namespace dfdetect {

std::vector<double> synth_direction(std::size_t dim) {
  return std::vector<double>(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

namespace {

std::size_t share(std::size_t n, double fraction) {
  return std::min(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

}  // namespace

DatasetManifest synth_dataset(const SynthConfig& config) {
  if (config.dim == 0) fail(ErrorKind::usage, "synth.bad_dim", "dim must be >= 1");
  if (!(config.separation >= 0.0) || !std::isfinite(config.separation))
    fail(ErrorKind::usage, "synth.bad_separation", "separation must be finite and >= 0");
  if (!(config.label_noise >= 0.0 && config.label_noise <= 1.0))
    fail(ErrorKind::usage, "synth.bad_noise", "label_noise must lie in [0, 1]");
  if (!(config.train_fraction >= 0.0 && config.val_fraction >= 0.0 &&
        config.train_fraction + config.val_fraction <= 1.0))
    fail(ErrorKind::usage, "synth.bad_fractions", "split fractions must be >= 0 and sum to <= 1");

  const std::size_t n = config.n_real + config.n_fake;
  Rng order_rng(derive_seed(config.seed, 0));
  Rng feature_rng(derive_seed(config.seed, 1));
  Rng noise_rng(derive_seed(config.seed, 2));

  std::vector<Label> labels(n, Label::fake);
  std::fill_n(labels.begin(), config.n_real, Label::real);
  std::shuffle(labels.begin(), labels.end(), order_rng);

  const auto u = synth_direction(config.dim);
  const double half = config.separation / 2.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution flip(config.label_noise);

  const std::size_t per_class[2] = {config.n_real, config.n_fake};
  std::size_t seen[2] = {0, 0};

  std::vector<SampleRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Label label = labels[i];
    const int cls = static_cast<int>(label);
    bool drawn_as_fake = label == Label::fake;
    if (flip(noise_rng)) drawn_as_fake = !drawn_as_fake;
    const double sign = drawn_as_fake ? 1.0 : -1.0;

    std::vector<double> x(config.dim);
    for (std::size_t d = 0; d < config.dim; ++d) x[d] = sign * half * u[d] + gauss(feature_rng);

    const std::size_t k = seen[cls]++;
    const std::size_t n_train = share(per_class[cls], config.train_fraction);
    const std::size_t n_val = std::min(per_class[cls] - n_train, share(per_class[cls], config.val_fraction));
    const Split split = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);

    records.push_back(SampleRecord{"synth-" + std::to_string(i), std::move(x), label, split});
  }
  return DatasetManifest(std::move(records));
}

}  // namespace dfdetect
