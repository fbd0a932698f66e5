#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace oaf {

// One SPD sample with its barycentric weight; a sample set's weights are
// expected to sum to 1.
struct WeightedSample {
  Eigen::MatrixXd matrix;
  double weight = 1.0;
};

struct MeanConfig {
  double tolerance = 1e-8;
  int max_iters = 200;
  double stein_step = 0.5;  // h in the Stein fixed-point update
  // Karcher stepsize schedule: false recomputes the alpha/beta condition
  // bounds from the current iterate each step; true accumulates them across
  // iterations, which shrinks tau like 1/t and stalls the residual around
  // 1e-5 — far short of the default tolerance — so per-iterate is the
  // default and the accumulated variant stays available for comparison.
  bool accumulate_stepsize = false;
};

// Wrap a plain matrix list with uniform weights 1/N.
std::vector<WeightedSample> equal_weights(const std::vector<Eigen::MatrixXd>& mats);

// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
// matching orthonormal eigenvector columns. Rejects non-symmetric input.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& S);

// expm / logm / square root of symmetric matrices through sym_eig with the
// scalar function applied to eigenvalues. matrix_log and matrix_sqrt demand
// positive definite input.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& S);
Eigen::MatrixXd matrix_log(const Eigen::MatrixXd& S);
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& S);

// Affine-invariant Riemannian distance on P_d: l2 norm of the log generalized
// eigenvalues, computed by Cholesky whitening (never forms S^-1 T).
double riemannian_distance(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T);

// Exponential map at S applied to a symmetric tangent U, and its inverse.
Eigen::MatrixXd exp_map_spd(const Eigen::MatrixXd& S, const Eigen::MatrixXd& U);
Eigen::MatrixXd log_map_spd(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T);

// expm of the weighted average of logms. Cheap, and exact for commuting
// samples; the starting point for both iterative means.
Eigen::MatrixXd log_euclidean_mean(const std::vector<WeightedSample>& samples);

// Stein (S-)divergence: logdet((S1+S2)/2) - 1/2 logdet(S1 S2), evaluated
// with Cholesky log-determinants.
double stein_divergence(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2);

// Frobenius norm of the weighted sum of logm(S^1/2 S_i^-1 S^1/2): the
// first-order optimality residual of the Karcher mean objective.
double karcher_residual(const Eigen::MatrixXd& S,
                        const std::vector<WeightedSample>& samples);

// Karcher (Riemannian) mean by the damped Cholesky fixed-point iteration
// with adaptive stepsize. Throws ConvergenceError with the last residual if
// the iteration budget runs out.
Eigen::MatrixXd riemannian_mean(const std::vector<WeightedSample>& samples,
                                const MeanConfig& config = {});

// Geometric matrix mean under the Stein divergence: geometric explicit Euler
// on the divergence gradient flow, stepsize halved whenever the residual
// norm increases. Throws ConvergenceError on budget exhaustion.
Eigen::MatrixXd stein_mean(const std::vector<WeightedSample>& samples,
                           const MeanConfig& config = {});

}  // namespace oaf
