#include "oaf/clustering.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oaf/errors.hpp"
#include "oaf/rng.hpp"

namespace oaf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate_clustering_args(const std::vector<MatrixXd>& samples, int K,
                              const char* what) {
  if (samples.empty()) {
    throw ConfigError(std::string(what) + ": no samples");
  }
  if (K < 1 || static_cast<std::size_t>(K) > samples.size()) {
    throw ConfigError(std::string(what) + ": K must lie in [1, sample count]");
  }
}

// k-means++ seeding with the Stein divergence playing the squared distance.
std::vector<MatrixXd> seed_centers(const std::vector<MatrixXd>& samples, int K,
                                   std::mt19937_64& rng) {
  const std::size_t n = samples.size();
  std::vector<MatrixXd> centers;
  centers.reserve(K);
  centers.push_back(samples[uniform_int(rng, static_cast<int>(n))]);

  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centers.size() < static_cast<std::size_t>(K)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = stein_divergence(samples[i], centers.back());
      if (d < nearest[i]) nearest[i] = d;
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform_double(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      // All samples coincide with some chosen center; any pick works.
      pick = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(n)));
    }
    centers.push_back(samples[pick]);
  }
  return centers;
}

std::vector<int> assign_nearest(const std::vector<MatrixXd>& samples,
                                const std::vector<MatrixXd>& centers) {
  std::vector<int> assign(samples.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double d = stein_divergence(samples[i], centers[j]);
      if (d < best) {
        best = d;
        assign[i] = static_cast<int>(j);
      }
    }
  }
  return assign;
}

double cluster_cost(const std::vector<MatrixXd>& samples,
                    const std::vector<int>& members, const MatrixXd& center) {
  double cost = 0.0;
  for (int i : members) cost += stein_divergence(samples[i], center);
  return cost;
}

}  // namespace

double kmeans_objective(const std::vector<MatrixXd>& samples,
                        const std::vector<MatrixXd>& centers) {
  if (centers.empty()) throw ConfigError("kmeans_objective: no centers");
  double obj = 0.0;
  for (const auto& s : samples) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) best = std::min(best, stein_divergence(s, c));
    obj += best;
  }
  return obj;
}

std::vector<MatrixXd> kmeans_stein(const std::vector<MatrixXd>& samples, int K,
                                   std::uint64_t seed, const MeanConfig& config,
                                   std::vector<double>* objective_trace) {
  validate_clustering_args(samples, K, "kmeans_stein");
  std::mt19937_64 rng(seed);
  std::vector<MatrixXd> centers = seed_centers(samples, K, rng);
  if (objective_trace) objective_trace->clear();

  double prev_obj = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<int> assign = assign_nearest(samples, centers);
    std::vector<std::vector<int>> members(K);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      members[assign[i]].push_back(static_cast<int>(i));
    }

    for (int j = 0; j < K; ++j) {
      if (members[j].empty()) {
        // Re-seed at the sample farthest from this center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const double d = stein_divergence(samples[i], centers[j]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[j] = samples[far];
        continue;
      }
      std::vector<WeightedSample> cluster;
      cluster.reserve(members[j].size());
      const double w = 1.0 / static_cast<double>(members[j].size());
      for (int i : members[j]) cluster.push_back({samples[i], w});
      MatrixXd updated = stein_mean(cluster, config);
      // The Stein mean iteration is approximate; keep the old center if the
      // proposed one does not improve its cluster, so Lloyd stays monotone.
      if (cluster_cost(samples, members[j], updated) <=
          cluster_cost(samples, members[j], centers[j])) {
        centers[j] = updated;
      }
    }

    const double obj = kmeans_objective(samples, centers);
    if (objective_trace) objective_trace->push_back(obj);
    if (std::isfinite(prev_obj) &&
        prev_obj - obj <= 1e-6 * std::max(prev_obj, 1e-30)) {
      break;
    }
    prev_obj = obj;
  }
  return centers;
}

MixtureState em_soft_clustering(const std::vector<MatrixXd>& samples, int K,
                                std::uint64_t seed, const MeanConfig& config) {
  validate_clustering_args(samples, K, "em_soft_clustering");
  const std::size_t n = samples.size();
  std::mt19937_64 rng(seed);

  MixtureState state;
  state.means = seed_centers(samples, K, rng);
  state.weights = VectorXd::Constant(K, 1.0 / K);
  state.responsibilities = MatrixXd::Zero(n, K);

  double prev_obj = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    // E-step: r_ij ~ pi_j exp(-D_S(S_i, M_j)), normalized per row in log
    // space so tiny likelihoods cannot underflow to an all-zero row.
    double neg_log_lik = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      VectorXd logits(K);
      for (int j = 0; j < K; ++j) {
        logits[j] = std::log(state.weights[j]) -
                    stein_divergence(samples[i], state.means[j]);
      }
      const double peak = logits.maxCoeff();
      VectorXd expo = (logits.array() - peak).exp();
      const double z = expo.sum();
      state.responsibilities.row(i) = (expo / z).transpose();
      neg_log_lik -= peak + std::log(z);
    }

    // M-step: mixture weights are responsibility sums over N (normalized so
    // they stay on the simplex); means solve weighted Stein-mean problems.
    for (int j = 0; j < K; ++j) {
      const double mass = state.responsibilities.col(j).sum();
      state.weights[j] = mass / static_cast<double>(n);
      if (mass <= 0.0) continue;  // dead component: keep its mean as-is
      std::vector<WeightedSample> weighted;
      weighted.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = state.responsibilities(i, j) / mass;
        if (w > 0.0) weighted.push_back({samples[i], w});
      }
      state.means[j] = stein_mean(weighted, config);
    }
    // Guard against drift in the normalized weights.
    state.weights /= state.weights.sum();

    if (std::isfinite(prev_obj) &&
        prev_obj - neg_log_lik <= 1e-6 * std::max(std::abs(prev_obj), 1e-30)) {
      break;
    }
    prev_obj = neg_log_lik;
  }
  return state;
}

Eigen::VectorXd nearest_prototype_distance(const MatrixXd& descriptor,
                                           const PrototypeDictionary& dict) {
  if (dict.layer_count < 1 ||
      dict.prototypes.size() != static_cast<std::size_t>(dict.layer_count)) {
    throw ConfigError("nearest_prototype_distance: malformed dictionary");
  }
  VectorXd out(dict.layer_count);
  for (int l = 0; l < dict.layer_count; ++l) {
    if (dict.prototypes[l].empty()) {
      throw ConfigError("nearest_prototype_distance: layer without prototypes");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& proto : dict.prototypes[l]) {
      best = std::min(best, stein_divergence(descriptor, proto));
    }
    out[l] = best;
  }
  return out;
}

}  // namespace oaf
