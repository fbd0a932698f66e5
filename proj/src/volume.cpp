#include "oaf/volume.hpp"

#include <cmath>
#include <string>

#include "oaf/errors.hpp"

namespace oaf {

void validate(const Volume& vol, const char* what) {
  if (vol.depth < 1 || vol.na < 1 || vol.nb < 1) {
    throw ConfigError(std::string(what) + ": volume dims must be positive");
  }
  if (static_cast<int>(vol.voxels.size()) != vol.size()) {
    throw ConfigError(std::string(what) + ": voxel buffer length " +
                      std::to_string(vol.voxels.size()) + " does not match dims");
  }
  for (float v : vol.voxels) {
    if (!std::isfinite(v)) {
      throw ConfigError(std::string(what) + ": volume contains non-finite values");
    }
  }
}

void validate(const LabeledVolume& vol, const char* what) {
  if (vol.depth < 1 || vol.na < 1 || vol.nb < 1) {
    throw ConfigError(std::string(what) + ": volume dims must be positive");
  }
  if (vol.layer_count < 1 || vol.layer_count > 255) {
    throw ConfigError(std::string(what) + ": layer count must lie in [1, 255]");
  }
  if (static_cast<int>(vol.labels.size()) != vol.size()) {
    throw ConfigError(std::string(what) + ": label buffer length " +
                      std::to_string(vol.labels.size()) + " does not match dims");
  }
  for (std::uint8_t l : vol.labels) {
    if (l >= vol.layer_count) {
      throw ConfigError(std::string(what) + ": label value out of range");
    }
  }
}

}  // namespace oaf
