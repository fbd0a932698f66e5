#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "oaf/spd.hpp"

namespace oaf {

// Per-layer lists of SPD prototypes extracted from labeled training
// descriptors. dim is the descriptor side length; layer l owns
// prototypes[l] with K_l >= 1 entries.
struct PrototypeDictionary {
  int layer_count = 0;
  int dim = 0;
  std::vector<std::vector<Eigen::MatrixXd>> prototypes;
};

// Soft-clustering result: K mixture components over N samples.
struct MixtureState {
  std::vector<Eigen::MatrixXd> means;  // K prototype matrices
  Eigen::VectorXd weights;             // K mixture weights, sum to 1
  Eigen::MatrixXd responsibilities;    // N x K, rows sum to 1
};

// Lloyd objective: total Stein divergence of every sample to its nearest
// center. Exposed so tests can assert the per-iteration descent directly.
double kmeans_objective(const std::vector<Eigen::MatrixXd>& samples,
                        const std::vector<Eigen::MatrixXd>& centers);

// Hard K-means under the Stein divergence: k-means++ style seeding (with
// the divergence as distance), assign-to-nearest, stein_mean updates. An
// empty cluster is re-seeded at the sample farthest from its stale center.
// Deterministic for a fixed seed. When objective_trace is given it receives
// the Lloyd objective after every update sweep (non-increasing).
std::vector<Eigen::MatrixXd> kmeans_stein(const std::vector<Eigen::MatrixXd>& samples,
                                          int K, std::uint64_t seed,
                                          const MeanConfig& config = {},
                                          std::vector<double>* objective_trace = nullptr);

// Soft EM variant: responsibilities proportional to pi_j exp(-D_S), kept
// stable with log-sum-exp; M-step runs responsibility-weighted Stein means
// and renormalizes mixture weights by the sample count.
MixtureState em_soft_clustering(const std::vector<Eigen::MatrixXd>& samples,
                                int K, std::uint64_t seed,
                                const MeanConfig& config = {});

// Entry j = smallest Stein divergence between the descriptor and any layer-j
// prototype.
Eigen::VectorXd nearest_prototype_distance(const Eigen::MatrixXd& descriptor,
                                           const PrototypeDictionary& dict);

}  // namespace oaf
