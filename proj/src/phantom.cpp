#include "oaf/phantom.hpp"

#include <cmath>

#include "oaf/errors.hpp"
#include "oaf/rng.hpp"

namespace oaf {

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct BoundaryMode {
  double amp = 0.0;
  double freq = 0.0;
  double mix = 0.0;  // orientation blend between the two lateral axes
  double phase = 0.0;
};

}  // namespace

std::pair<Volume, LabeledVolume> generate_phantom(const PhantomConfig& config) {
  const int depth = config.dims[0], na = config.dims[1], nb = config.dims[2];
  const int c = config.layer_count;
  for (int d : config.dims)
    if (d < 1) throw ConfigError("phantom: dims must be positive");
  if (c < 1 || c > 255)
    throw ConfigError("phantom: layer_count must be in [1, 255]");
  if (depth < c) throw ConfigError("phantom: depth must be >= layer_count");
  if (config.modes < 0) throw ConfigError("phantom: modes must be >= 0");
  if (config.amplitude < 0.0)
    throw ConfigError("phantom: amplitude must be >= 0");
  if (config.noise_sigma < 0.0 || config.speckle_sigma < 0.0)
    throw ConfigError("phantom: noise sigmas must be >= 0");
  if (!config.layer_means.empty() &&
      config.layer_means.size() != static_cast<std::size_t>(c))
    throw ConfigError("phantom: layer_means must have layer_count entries");
  // Adjacent boundary surfaces sit depth/c apart and each can move at most
  // +-amplitude, so this is the sharp no-crossing condition.
  const double gap = static_cast<double>(depth) / c;
  if (c > 1 && 2.0 * config.amplitude >= gap)
    throw ConfigError("phantom: amplitude large enough to cross boundaries");

  std::vector<double> means = config.layer_means;
  if (means.empty()) {
    means.resize(c);
    for (int l = 0; l < c; ++l)
      means[l] = c == 1 ? 1.0 : 0.25 + 0.75 * l / (c - 1);
  }

  std::mt19937_64 rng(config.seed);

  // Mode parameters per boundary; per-mode amplitudes sum to <= amplitude.
  std::vector<std::vector<BoundaryMode>> surf(c - 1);
  for (int m = 0; m + 1 < c; ++m) {
    surf[m].resize(config.modes);
    for (int q = 0; q < config.modes; ++q) {
      BoundaryMode& bm = surf[m][q];
      bm.amp = config.amplitude / std::max(1, config.modes) *
               (0.5 + 0.5 * uniform_double(rng));
      bm.freq = q + 1.0;
      bm.mix = uniform_double(rng);
      bm.phase = kTwoPi * uniform_double(rng);
    }
  }

  Volume vol;
  vol.depth = depth;
  vol.na = na;
  vol.nb = nb;
  vol.voxels.resize(static_cast<std::size_t>(depth) * na * nb);
  LabeledVolume lab;
  lab.depth = depth;
  lab.na = na;
  lab.nb = nb;
  lab.layer_count = c;
  lab.labels.resize(vol.voxels.size());

  std::vector<double> bounds(std::max(0, c - 1));
  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a < na; ++a) {
      for (int m = 0; m + 1 < c; ++m) {
        double dev = 0.0;
        for (const BoundaryMode& bm : surf[m]) {
          const double u = na > 1 ? static_cast<double>(a) / na : 0.0;
          const double v = nb > 1 ? static_cast<double>(b) / nb : 0.0;
          dev += bm.amp * std::sin(kTwoPi * bm.freq * (bm.mix * u + (1.0 - bm.mix) * v) +
                                   bm.phase);
        }
        bounds[m] = (m + 1) * gap + dev;
        if (m > 0 && bounds[m] <= bounds[m - 1])
          throw ConfigError("phantom: boundaries crossed");  // unreachable given the amplitude guard
      }
      int layer = 0;
      for (int k = 0; k < depth; ++k) {
        while (layer + 1 < c && bounds[layer] <= k) ++layer;
        const double xi = normal_double(rng);
        const double eta = normal_double(rng);
        const double value =
            means[layer] * (1.0 + config.speckle_sigma * xi) +
            config.noise_sigma * eta;
        const int i = vol.index(k, a, b);
        vol.voxels[i] = static_cast<float>(value);
        lab.labels[i] = static_cast<std::uint8_t>(layer);
      }
    }
  }
  return {std::move(vol), std::move(lab)};
}

}  // namespace oaf
