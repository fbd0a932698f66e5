#pragma once

#include <array>
#include <cstdint>

#include "oaf/clustering.hpp"
#include "oaf/features.hpp"
#include "oaf/flow.hpp"
#include "oaf/volume.hpp"

namespace oaf {

// Orchestration shared by the CLI and the end-to-end tests: supervised
// prototype training from a labeled volume and segmentation of a volume (or
// a precomputed distance matrix) with the plain or ordered flow.

enum class MeanKind { stein, riemannian, logeuclid };

struct TrainConfig {
  int prototypes_per_layer = 8;
  std::uint64_t seed = 0;
  MeanKind mean_kind = MeanKind::stein;
  // Deterministic per-layer subsample cap; keeps Lloyd iterations tractable
  // on full volumes.
  int max_samples_per_layer = 2000;
  FeatureConfig features;
  // Covariance descriptors span several orders of magnitude across channels,
  // which slows the mean fixed points well past the library default budget.
  MeanConfig mean_config{.tolerance = 1e-8, .max_iters = 2000,
                         .stein_step = 0.5};
};

// Groups voxel descriptors by their layer label and runs Stein K-means
// within each layer.  With a non-Stein mean_kind the cluster memberships
// stay as Lloyd leaves them and the returned prototypes are recomputed with
// the selected barycenter.
PrototypeDictionary train_dictionary(const Volume& volume,
                                     const LabeledVolume& labels,
                                     const TrainConfig& config);

struct SegmentationResult {
  LabeledVolume labels;
  FlowTrace trace;
  double runtime_s = 0.0;
};

SegmentationResult segment_volume(const Volume& volume,
                                  const PrototypeDictionary& dict,
                                  const FeatureConfig& features,
                                  const FlowConfig& flow, bool ordered);

// Same flow on an externally supplied n x c distance matrix laid out in the
// volume's voxel order.
SegmentationResult segment_distances(const std::array<int, 3>& dims,
                                     const Mat& distances,
                                     const FlowConfig& flow, bool ordered);

}  // namespace oaf
