#include "oaf/spd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd symmetrize(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

void require_square(const MatrixXd& S, const char* what) {
  if (S.rows() != S.cols() || S.rows() == 0) {
    throw ConfigError(std::string(what) + ": matrix must be square and nonempty");
  }
}

void require_same_dim(const MatrixXd& A, const MatrixXd& B, const char* what) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw ConfigError(std::string(what) + ": dimension mismatch");
  }
}

void validate_samples(const std::vector<WeightedSample>& samples, const char* what) {
  if (samples.empty()) {
    throw ConfigError(std::string(what) + ": empty sample list");
  }
  const Eigen::Index d = samples.front().matrix.rows();
  double wsum = 0.0;
  for (const auto& s : samples) {
    require_square(s.matrix, what);
    if (s.matrix.rows() != d) {
      throw ConfigError(std::string(what) + ": samples of mixed dimension");
    }
    if (!(s.weight > 0.0)) {
      throw ConfigError(std::string(what) + ": weights must be positive");
    }
    wsum += s.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw ConfigError(std::string(what) + ": weights must sum to 1");
  }
}

void validate_config(const MeanConfig& config, const char* what) {
  if (!(config.tolerance > 0.0)) {
    throw ConfigError(std::string(what) + ": tolerance must be positive");
  }
  if (config.max_iters < 1) {
    throw ConfigError(std::string(what) + ": max_iters must be at least 1");
  }
  if (!(config.stein_step > 0.0) || config.stein_step > 1.0) {
    throw ConfigError(std::string(what) + ": stein_step must lie in (0, 1]");
  }
}

// log(c)/(c-1), continuously extended to 1 at c = 1.
double log_ratio(double c) {
  const double delta = c - 1.0;
  if (delta == 0.0) return 1.0;
  return std::log1p(delta) / delta;
}

double cholesky_logdet(const MatrixXd& S, const char* what) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw ConfigError(std::string(what) + ": matrix not positive definite");
  }
  return 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

// Residual reusing precomputed Cholesky factors of the samples.
double karcher_residual_with(const MatrixXd& S,
                             const std::vector<WeightedSample>& samples,
                             const std::vector<Eigen::LLT<MatrixXd>>& sample_llt) {
  const MatrixXd half = matrix_sqrt(S);
  MatrixXd acc = MatrixXd::Zero(S.rows(), S.cols());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // S^1/2 S_i^-1 S^1/2 stays SPD; symmetrize away solve roundoff.
    MatrixXd m = symmetrize(half * sample_llt[i].solve(half));
    acc += samples[i].weight * matrix_log(m);
  }
  return acc.norm();
}

std::vector<Eigen::LLT<MatrixXd>> factor_samples(
    const std::vector<WeightedSample>& samples, const char* what) {
  std::vector<Eigen::LLT<MatrixXd>> llts;
  llts.reserve(samples.size());
  for (const auto& s : samples) {
    llts.emplace_back(s.matrix);
    if (llts.back().info() != Eigen::Success) {
      throw ConfigError(std::string(what) + ": sample not positive definite");
    }
  }
  return llts;
}

}  // namespace

std::vector<WeightedSample> equal_weights(const std::vector<Eigen::MatrixXd>& mats) {
  if (mats.empty()) throw ConfigError("equal_weights: empty matrix list");
  std::vector<WeightedSample> out;
  out.reserve(mats.size());
  const double w = 1.0 / static_cast<double>(mats.size());
  for (const auto& m : mats) out.push_back({m, w});
  return out;
}

std::pair<VectorXd, MatrixXd> sym_eig(const MatrixXd& S) {
  require_square(S, "sym_eig");
  const double asym = (S - S.transpose()).norm();
  if (asym > 1e-10 * (1.0 + S.norm())) {
    throw ConfigError("sym_eig: input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrize(S));
  if (solver.info() != Eigen::Success) {
    throw ConfigError("sym_eig: eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd matrix_exp(const MatrixXd& S) {
  auto [lam, V] = sym_eig(S);
  return V * lam.array().exp().matrix().asDiagonal() * V.transpose();
}

Eigen::MatrixXd matrix_log(const MatrixXd& S) {
  auto [lam, V] = sym_eig(S);
  if (lam.minCoeff() <= 0.0) {
    throw ConfigError("matrix_log: input not positive definite");
  }
  return V * lam.array().log().matrix().asDiagonal() * V.transpose();
}

Eigen::MatrixXd matrix_sqrt(const MatrixXd& S) {
  auto [lam, V] = sym_eig(S);
  if (lam.minCoeff() <= 0.0) {
    throw ConfigError("matrix_sqrt: input not positive definite");
  }
  return V * lam.array().sqrt().matrix().asDiagonal() * V.transpose();
}

double riemannian_distance(const MatrixXd& S, const MatrixXd& T) {
  require_square(S, "riemannian_distance");
  require_same_dim(S, T, "riemannian_distance");
  Eigen::LLT<MatrixXd> llt(symmetrize(S));
  if (llt.info() != Eigen::Success) {
    throw ConfigError("riemannian_distance: first argument not positive definite");
  }
  MatrixXd L = llt.matrixL();
  // Whitened matrix L^-1 T L^-T shares its eigenvalues with S^-1 T.
  MatrixXd W = L.triangularView<Eigen::Lower>().solve(T.transpose());
  W = L.triangularView<Eigen::Lower>().solve(MatrixXd(W.transpose()));
  auto [lam, V] = sym_eig(symmetrize(W));
  (void)V;
  if (lam.minCoeff() <= 0.0) {
    throw ConfigError("riemannian_distance: second argument not positive definite");
  }
  return lam.array().log().matrix().norm();
}

Eigen::MatrixXd exp_map_spd(const MatrixXd& S, const MatrixXd& U) {
  require_square(S, "exp_map_spd");
  require_same_dim(S, U, "exp_map_spd");
  if (U.isZero(0.0)) return S;
  auto [lam, V] = sym_eig(S);
  if (lam.minCoeff() <= 0.0) {
    throw ConfigError("exp_map_spd: base point not positive definite");
  }
  MatrixXd half = V * lam.array().sqrt().matrix().asDiagonal() * V.transpose();
  MatrixXd inv_half =
      V * lam.array().rsqrt().matrix().asDiagonal() * V.transpose();
  MatrixXd inner = matrix_exp(symmetrize(inv_half * U * inv_half));
  return symmetrize(half * inner * half);
}

Eigen::MatrixXd log_map_spd(const MatrixXd& S, const MatrixXd& T) {
  require_square(S, "log_map_spd");
  require_same_dim(S, T, "log_map_spd");
  auto [lam, V] = sym_eig(S);
  if (lam.minCoeff() <= 0.0) {
    throw ConfigError("log_map_spd: base point not positive definite");
  }
  MatrixXd half = V * lam.array().sqrt().matrix().asDiagonal() * V.transpose();
  MatrixXd inv_half =
      V * lam.array().rsqrt().matrix().asDiagonal() * V.transpose();
  MatrixXd inner = matrix_log(symmetrize(inv_half * T * inv_half));
  return symmetrize(half * inner * half);
}

Eigen::MatrixXd log_euclidean_mean(const std::vector<WeightedSample>& samples) {
  validate_samples(samples, "log_euclidean_mean");
  const Eigen::Index d = samples.front().matrix.rows();
  MatrixXd acc = MatrixXd::Zero(d, d);
  for (const auto& s : samples) acc += s.weight * matrix_log(s.matrix);
  return matrix_exp(symmetrize(acc));
}

double stein_divergence(const MatrixXd& S1, const MatrixXd& S2) {
  require_square(S1, "stein_divergence");
  require_same_dim(S1, S2, "stein_divergence");
  const double mid = cholesky_logdet(0.5 * (S1 + S2), "stein_divergence");
  const double ld1 = cholesky_logdet(S1, "stein_divergence");
  const double ld2 = cholesky_logdet(S2, "stein_divergence");
  return mid - 0.5 * (ld1 + ld2);
}

double karcher_residual(const MatrixXd& S,
                        const std::vector<WeightedSample>& samples) {
  validate_samples(samples, "karcher_residual");
  require_same_dim(S, samples.front().matrix, "karcher_residual");
  return karcher_residual_with(S, samples, factor_samples(samples, "karcher_residual"));
}

Eigen::MatrixXd riemannian_mean(const std::vector<WeightedSample>& samples,
                                const MeanConfig& config) {
  validate_samples(samples, "riemannian_mean");
  validate_config(config, "riemannian_mean");
  const Eigen::Index d = samples.front().matrix.rows();
  const auto sample_llt = factor_samples(samples, "riemannian_mean");

  MatrixXd S = log_euclidean_mean(samples);
  double residual = karcher_residual_with(S, samples, sample_llt);
  if (residual <= config.tolerance) return S;

  double alpha = 0.0, beta = 0.0;
  const MatrixXd I = MatrixXd::Identity(d, d);
  for (int t = 0; t < config.max_iters; ++t) {
    auto [lam, V] = sym_eig(S);
    if (lam.minCoeff() <= 0.0) {
      throw ConvergenceError("riemannian_mean: iterate left the SPD cone",
                             residual, t);
    }
    const double cond = lam.maxCoeff() / lam.minCoeff();
    if (cond == 1.0) return S;  // perfectly conditioned: nothing to damp
    const double g = log_ratio(cond);
    if (config.accumulate_stepsize) {
      alpha += g;
      beta += cond * g;
    } else {
      alpha = g;
      beta = cond * g;
    }
    double tau = 2.0 / (alpha + beta);

    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("riemannian_mean: Cholesky of iterate failed",
                             residual, t);
    }
    MatrixXd L = llt.matrixL();
    // Weighted tangent direction in whitened coordinates: each term
    // L' S_i^-1 L is an SPD congruence of S_i^-1.
    MatrixXd A = MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      MatrixXd m = symmetrize(L.transpose() * sample_llt[i].solve(L));
      A += samples[i].weight * matrix_log(m);
    }

    // Damped update L (I - tau A) L'; halve tau if a too-aggressive step
    // would leave the cone.
    MatrixXd next;
    for (int halvings = 0;; ++halvings) {
      next = symmetrize(L * (I - tau * A) * L.transpose());
      if (Eigen::LLT<MatrixXd>(next).info() == Eigen::Success) break;
      if (halvings > 60) {
        throw ConvergenceError("riemannian_mean: no positive definite step found",
                               residual, t);
      }
      tau *= 0.5;
    }
    S = next;

    residual = karcher_residual_with(S, samples, sample_llt);
    if (residual <= config.tolerance) return S;
  }
  throw ConvergenceError("riemannian_mean: not converged within max_iters",
                         residual, config.max_iters);
}

Eigen::MatrixXd stein_mean(const std::vector<WeightedSample>& samples,
                           const MeanConfig& config) {
  validate_samples(samples, "stein_mean");
  validate_config(config, "stein_mean");
  const Eigen::Index d = samples.front().matrix.rows();
  const MatrixXd I = MatrixXd::Identity(d, d);

  MatrixXd S = log_euclidean_mean(samples);
  double h = config.stein_step;
  double prev_norm = std::numeric_limits<double>::infinity();
  double norm = prev_norm;
  for (int t = 0; t < config.max_iters; ++t) {
    auto [lam, V] = sym_eig(S);
    if (lam.minCoeff() <= 0.0) {
      throw ConvergenceError("stein_mean: iterate left the SPD cone", norm, t);
    }
    MatrixXd half = V * lam.array().sqrt().matrix().asDiagonal() * V.transpose();

    MatrixXd R = MatrixXd::Zero(d, d);
    for (const auto& s : samples) {
      Eigen::LLT<MatrixXd> llt(0.5 * (S + s.matrix));
      if (llt.info() != Eigen::Success) {
        throw ConvergenceError("stein_mean: midpoint not positive definite", norm, t);
      }
      R += s.weight * llt.solve(I);
    }
    MatrixXd U = symmetrize(I - half * R * half);
    norm = U.norm();
    if (norm <= config.tolerance) return S;
    if (norm > prev_norm) h *= 0.5;  // overshoot: damp the flow
    prev_norm = norm;
    S = symmetrize(half * matrix_exp(0.5 * h * U) * half);
  }
  throw ConvergenceError("stein_mean: not converged within max_iters", norm,
                         config.max_iters);
}

}  // namespace oaf
