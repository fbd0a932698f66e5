#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "oaf/volume.hpp"

namespace oaf {

// Synthetic layered volume: c stacked layers separated by smooth sinusoidal
// boundary surfaces, constant mean intensity per layer, optional speckle
// (multiplicative) and additive Gaussian noise.
struct PhantomConfig {
  std::array<int, 3> dims{64, 64, 8};  // (depth, na, nb)
  int layer_count = 6;
  int modes = 2;            // sinusoidal modes per boundary surface
  double amplitude = 2.0;   // total boundary excursion bound, in voxels
  std::vector<double> layer_means;  // size layer_count; empty = auto ramp
  double noise_sigma = 0.0;
  double speckle_sigma = 0.0;
  std::uint64_t seed = 0;
};

// Labels are exact (noise only perturbs intensities), boundaries are
// strictly increasing along every column, and output is deterministic per
// seed.  Amplitudes large enough to let adjacent boundaries touch are
// rejected.
std::pair<Volume, LabeledVolume> generate_phantom(const PhantomConfig& config);

}  // namespace oaf
