#include "oaf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <utility>
#include <vector>

#include "oaf/errors.hpp"
#include "oaf/rng.hpp"
#include "oaf/spd.hpp"

namespace oaf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Deterministic partial Fisher-Yates: keep `keep` of the indices.
void subsample(std::vector<int>& idx, int keep, std::mt19937_64& rng) {
  const int n = static_cast<int>(idx.size());
  if (keep >= n) return;
  for (int i = 0; i < keep; ++i) {
    const int j = i + uniform_int(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
}

Eigen::MatrixXd mean_with_kind(const std::vector<Eigen::MatrixXd>& members,
                               MeanKind kind, const MeanConfig& mean_config) {
  std::vector<WeightedSample> samples;
  const double w = 1.0 / static_cast<double>(members.size());
  for (const auto& m : members) samples.push_back({m, w});
  switch (kind) {
    case MeanKind::riemannian:
      return riemannian_mean(samples, mean_config);
    case MeanKind::logeuclid:
      return log_euclidean_mean(samples);
    case MeanKind::stein:
      break;
  }
  return stein_mean(samples, mean_config);
}

}  // namespace

PrototypeDictionary train_dictionary(const Volume& volume,
                                     const LabeledVolume& labels,
                                     const TrainConfig& config) {
  validate(volume);
  validate(labels);
  if (volume.depth != labels.depth || volume.na != labels.na ||
      volume.nb != labels.nb)
    throw ConfigError("train: volume and label dimensions differ");
  if (config.prototypes_per_layer < 1)
    throw ConfigError("train: prototypes_per_layer must be positive");
  if (config.max_samples_per_layer < 1)
    throw ConfigError("train: max_samples_per_layer must be positive");

  const int c = labels.layer_count;
  std::vector<std::vector<int>> by_layer(c);
  for (int i = 0; i < volume.size(); ++i) {
    by_layer[labels.labels[i]].push_back(i);
  }
  for (int l = 0; l < c; ++l) {
    if (by_layer[l].empty())
      throw ConfigError("train: layer " + std::to_string(l) +
                        " has no training voxels");
  }

  const Mat field = feature_vector_field(volume, config.features.scales);
  const auto weights = make_patch_weights(config.features.patch,
                                          config.features.gaussian_patch_sigma);
  const std::array<int, 3> dims{volume.depth, volume.na, volume.nb};

  std::mt19937_64 rng(config.seed);
  PrototypeDictionary dict;
  dict.layer_count = c;
  dict.dim = kFeatureCount;
  dict.prototypes.resize(c);

  for (int l = 0; l < c; ++l) {
    subsample(by_layer[l], config.max_samples_per_layer, rng);
    std::vector<Eigen::MatrixXd> descriptors;
    descriptors.reserve(by_layer[l].size());
    for (int i : by_layer[l]) {
      descriptors.push_back(region_covariance(field, dims, i,
                                              config.features.patch, weights,
                                              config.features.eps_reg));
    }
    const int K = std::min<int>(config.prototypes_per_layer,
                                static_cast<int>(descriptors.size()));
    auto centers = kmeans_stein(descriptors, K, config.seed + l,
                                config.mean_config);

    if (config.mean_kind != MeanKind::stein) {
      // Recompute each cluster's prototype with the requested barycenter,
      // keeping the Stein partition.
      std::vector<std::vector<Eigen::MatrixXd>> members(K);
      for (const auto& d : descriptors) {
        int best = 0;
        double best_div = stein_divergence(d, centers[0]);
        for (int k = 1; k < K; ++k) {
          const double div = stein_divergence(d, centers[k]);
          if (div < best_div) {
            best_div = div;
            best = k;
          }
        }
        members[best].push_back(d);
      }
      for (int k = 0; k < K; ++k) {
        if (!members[k].empty())
          centers[k] = mean_with_kind(members[k], config.mean_kind,
                                      config.mean_config);
      }
    }
    dict.prototypes[l] = std::move(centers);
  }
  return dict;
}

SegmentationResult segment_volume(const Volume& volume,
                                  const PrototypeDictionary& dict,
                                  const FeatureConfig& features,
                                  const FlowConfig& flow, bool ordered) {
  const auto t0 = Clock::now();
  const Mat D = build_distance_matrix(volume, dict, features);
  SegmentationResult res =
      segment_distances({volume.depth, volume.na, volume.nb}, D, flow, ordered);
  res.runtime_s = seconds_since(t0);
  return res;
}

SegmentationResult segment_distances(const std::array<int, 3>& dims,
                                     const Mat& distances,
                                     const FlowConfig& flow, bool ordered) {
  const auto t0 = Clock::now();
  const std::int64_t n =
      static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  if (distances.rows() != n)
    throw ConfigError("segment: distance rows (" +
                      std::to_string(distances.rows()) +
                      ") do not match the voxel count (" + std::to_string(n) +
                      ")");
  if (distances.cols() < 2 || distances.cols() > 255)
    throw ConfigError("segment: label count must be in [2, 255]");

  const auto graph = build_grid_graph(dims, flow.extents);
  const auto ascans = build_ascans(dims);
  FlowResult flown = integrate(distances, graph, ascans, flow, ordered);

  SegmentationResult res;
  res.labels.depth = dims[0];
  res.labels.na = dims[1];
  res.labels.nb = dims[2];
  res.labels.layer_count = static_cast<int>(distances.cols());
  const auto rounded = round_labels(flown.assignment);
  res.labels.labels.assign(rounded.begin(), rounded.end());
  res.trace = std::move(flown.trace);
  res.runtime_s = seconds_since(t0);
  return res;
}

}  // namespace oaf
