#include "oaf/simplex.hpp"

#include <cmath>
#include <vector>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

void require_dim(const Vec& x, Eigen::Index c, const char* what) {
  if (x.size() != c) {
    throw ConfigError(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

Vec barycenter(int c) {
  if (c < 2) throw ConfigError("barycenter: need at least 2 labels");
  return Vec::Constant(c, 1.0 / c);
}

Mat barycenter_matrix(int n, int c) {
  if (n < 1) throw ConfigError("barycenter_matrix: need at least 1 row");
  if (c < 2) throw ConfigError("barycenter_matrix: need at least 2 labels");
  return Mat::Constant(n, c, 1.0 / c);
}

Vec project_tangent(const Vec& x) {
  if (x.size() < 2) throw ConfigError("project_tangent: need dimension >= 2");
  return x.array() - x.mean();
}

Vec replicator_map(const Vec& p, const Vec& x) {
  require_dim(x, p.size(), "replicator_map");
  return p.cwiseProduct(x) - p.dot(x) * p;
}

Vec exp_affine(const Vec& p, const Vec& v) {
  require_dim(v, p.size(), "exp_affine");
  if ((v.array() == 0.0).all()) return p;  // Exp_p(0) = p exactly
  Vec z = v.cwiseQuotient(p);
  const double shift = z.maxCoeff();
  Vec w = p.array() * (z.array() - shift).exp();
  return w / w.sum();
}

Vec exp_affine_inverse(const Vec& p, const Vec& q) {
  require_dim(q, p.size(), "exp_affine_inverse");
  if ((q.array() <= 0.0).any()) {
    throw ConfigError("exp_affine_inverse: q must be interior (all entries > 0)");
  }
  Vec r = (q.array() / p.array()).log();
  return replicator_map(p, r);
}

Vec exp_lifted(const Vec& p, const Vec& x) {
  require_dim(x, p.size(), "exp_lifted");
  const double shift = x.maxCoeff();
  Vec w = p.array() * (x.array() - shift).exp();
  return w / w.sum();
}

Mat exp_lifted_rows(const Mat& W, const Mat& X) {
  if (W.rows() != X.rows() || W.cols() != X.cols()) {
    throw ConfigError("exp_lifted_rows: shape mismatch");
  }
  Mat out(W.rows(), W.cols());
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    const double shift = X.row(i).maxCoeff();
    Eigen::RowVectorXd w =
        W.row(i).array() * (X.row(i).array() - shift).exp();
    out.row(i) = w / w.sum();
  }
  return out;
}

double mean_entropy(const Mat& W) {
  const Eigen::Index n = W.rows();
  if (n == 0) return 0.0;
  std::vector<double> h(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double hi = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const double w = W(i, j);
      if (w > 0.0) hi -= w * std::log(w);
    }
    h[static_cast<std::size_t>(i)] = hi;
  }
  // Fixed-order pairwise reduction: deterministic regardless of how the
  // per-row entropies were produced.
  std::size_t m = h.size();
  while (m > 1) {
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) {
      h[i] = h[2 * i] + h[2 * i + 1];
    }
    if (m % 2 == 1) {
      h[half] = h[m - 1];
      m = half + 1;
    } else {
      m = half;
    }
  }
  return h[0] / static_cast<double>(n);
}

double clamp_interior(Mat& W) {
  double max_drift = 0.0;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    const double drift = std::abs(W.row(i).sum() - 1.0);
    if (drift > max_drift) max_drift = drift;
    W.row(i) = W.row(i).cwiseMax(kSimplexFloor);
    W.row(i) /= W.row(i).sum();
  }
  return max_drift;
}

}  // namespace oaf
