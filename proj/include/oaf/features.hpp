#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "oaf/clustering.hpp"
#include "oaf/volume.hpp"

namespace oaf {

// Feature channel order used throughout: intensity first, then first
// derivatives, mixed second derivatives (scaled by sqrt 2 so the covariance
// treats them like the off-diagonal Hessian entries they are), then pure
// second derivatives. x = A-scan axis, y = B-scan axis, z = depth.
//   (I, dx, dy, dz, sqrt2*dxy, sqrt2*dyz, sqrt2*dxz, dxx, dyy, dzz)
inline constexpr int kFeatureCount = 10;

struct FeatureConfig {
  std::vector<double> scales{1.0, 2.0};
  std::array<int, 3> patch{3, 5, 5};  // (depth, na, nb) extents, odd
  double eps_reg = 1e-6;
  // Uniform patch weights by default; set sigma > 0 for a Gaussian falloff
  // over patch offsets instead.
  double gaussian_patch_sigma = 0.0;
};

// The nine derivative channels (dx..dzz order as above, without the sqrt-2
// factors), scale-normalized: response at scale sigma times sigma^order,
// then the maximum over scales in absolute value with the winning sign
// kept. Rows follow the volume's linear voxel order.
Eigen::MatrixXd scale_normalized_derivatives(const Volume& vol,
                                             const std::vector<double>& scales);

// Full 10-channel feature field: raw intensity plus the scale-normalized
// derivatives with sqrt-2 weighting on the mixed channels.
Eigen::MatrixXd feature_vector_field(const Volume& vol,
                                     const std::vector<double>& scales);

// Per-offset patch weights in (depth, na, nb) offset order, normalized to
// sum 1. sigma <= 0 gives uniform weights.
std::vector<double> make_patch_weights(std::array<int, 3> patch, double sigma);

// Regularized weighted covariance of the feature vectors over the patch
// centered at the given voxel: sum theta (f - fbar)(f - fbar)' + eps I.
// Patches reaching outside the volume are clipped and the weights
// renormalized over the surviving offsets.
Eigen::MatrixXd region_covariance(const Eigen::MatrixXd& features,
                                  std::array<int, 3> dims, int center,
                                  std::array<int, 3> patch,
                                  const std::vector<double>& weights,
                                  double eps_reg);

// Row i = Stein divergence of voxel i's covariance descriptor to the
// nearest prototype of each layer.
Eigen::MatrixXd build_distance_matrix(const Volume& vol,
                                      const PrototypeDictionary& dict,
                                      const FeatureConfig& config = {});

// Externally computed class scores C become costs by sign flip, then each
// row is shifted to put its minimum at zero (the flow ignores per-row
// constants, so this only conditions the exponentials).
Eigen::MatrixXd ingest_scores(const Eigen::MatrixXd& scores);

}  // namespace oaf
