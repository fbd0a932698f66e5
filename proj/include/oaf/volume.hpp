#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace oaf {

// Scalar volume with axes (depth, A-scan index, B-scan index) and
// depth-fastest memory layout: voxel (k, a, b) lives at
// k + depth * (a + na * b). An A-scan is one depth column at fixed (a, b).
struct Volume {
  int depth = 0;
  int na = 0;
  int nb = 0;
  std::vector<float> voxels;
  std::optional<std::array<double, 3>> spacing_um;

  int size() const { return depth * na * nb; }
  int index(int k, int a, int b) const { return k + depth * (a + na * b); }
  float at(int k, int a, int b) const { return voxels[index(k, a, b)]; }
  float& at(int k, int a, int b) { return voxels[index(k, a, b)]; }
};

// Per-voxel labels over the same grid; values in [0, layer_count).
struct LabeledVolume {
  int depth = 0;
  int na = 0;
  int nb = 0;
  int layer_count = 0;
  std::vector<std::uint8_t> labels;

  int size() const { return depth * na * nb; }
  int index(int k, int a, int b) const { return k + depth * (a + na * b); }
  std::uint8_t at(int k, int a, int b) const { return labels[index(k, a, b)]; }
  std::uint8_t& at(int k, int a, int b) { return labels[index(k, a, b)]; }
};

// Throw ConfigError unless dims are positive, the buffer length matches and
// (for Volume) all values are finite.
void validate(const Volume& vol, const char* what = "volume");
void validate(const LabeledVolume& vol, const char* what = "labels");

}  // namespace oaf
