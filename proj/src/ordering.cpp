#include "oaf/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

constexpr double kOrderTol = 1e-12;
constexpr double kExpClamp = 700.0;

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("ordering: gamma must be positive");
}

void check_ascan(const AscanView& ascan, const Mat& W) {
  std::unordered_set<int> seen;
  for (int r : ascan) {
    if (r < 0 || r >= W.rows())
      throw ConfigError("ordering: ascan index out of range");
    if (!seen.insert(r).second)
      throw ConfigError("ordering: ascan indices must be distinct");
  }
}

// Clamped componentwise phi' = -exp(-y/gamma).
Vec phi_prime(const Vec& y, double gamma) {
  Vec g(y.size());
  for (int k = 0; k < y.size(); ++k) {
    g[k] = -std::exp(std::min(-y[k] / gamma, kExpClamp));
  }
  return g;
}

// Prefix sums, i.e. Q * v for the lower-triangular all-ones Q.
Vec prefix_sums(const Vec& v) {
  Vec out(v.size());
  double s = 0.0;
  for (int k = 0; k < v.size(); ++k) {
    s += v[k];
    out[k] = s;
  }
  return out;
}

// Greedy north-west fill over the upper triangle: column q draws from the
// shallowest rows l <= q that still hold mass.  Prefix dominance (exactly
// the is_ordered predicate) guarantees rows 1..q always retain at least the
// mass still owed to column q, so the fill never stalls.  Entries are mins
// of nonnegative quantities and the lower triangle is never written, so
// M >= 0 and <Q - I, M> = 0 hold exactly.
Mat coupling_fill(const Vec& wi, const Vec& wj) {
  const int c = static_cast<int>(wi.size());
  Mat M = Mat::Zero(c, c);
  Vec rem = wi;
  int l = 0;
  for (int q = 0; q < c; ++q) {
    double need = wj[q];
    while (true) {
      const double a = std::min(rem[l], need);
      M(l, q) += a;
      rem[l] -= a;
      need -= a;
      if (need <= 0.0) break;
      if (l == q) break;  // leftover is roundoff debt; within tolerance
      ++l;
    }
  }
  return M;
}

}  // namespace

OrderingOperator make_ordering_operator(int label_count) {
  if (label_count < 1) throw ConfigError("ordering: label_count must be >= 1");
  OrderingOperator op;
  op.label_count = label_count;
  op.B = Mat::Zero(label_count, label_count);
  op.Q = Mat::Zero(label_count, label_count);
  for (int i = 0; i < label_count; ++i) {
    op.B(i, i) = -1.0;
    if (i + 1 < label_count) op.B(i + 1, i) = 1.0;
    for (int j = 0; j <= i; ++j) op.Q(i, j) = 1.0;
  }
  return op;
}

bool is_ordered(const Vec& w_i, const Vec& w_j) {
  if (w_i.size() != w_j.size())
    throw ConfigError("is_ordered: dimension mismatch");
  double s = 0.0;
  for (int k = 0; k < w_i.size(); ++k) {
    s += w_i[k] - w_j[k];
    if (s < -kOrderTol) return false;
  }
  return true;
}

std::vector<PairResidual> order_residuals(const AscanView& ascan, const Mat& W,
                                          int window) {
  check_ascan(ascan, W);
  const int n = static_cast<int>(ascan.size());
  std::vector<PairResidual> out;
  for (int i = 0; i < n; ++i) {
    const int jmax = window > 0 ? std::min(n - 1, i + window) : n - 1;
    for (int j = i + 1; j <= jmax; ++j) {
      Vec y = prefix_sums(W.row(ascan[i]) - W.row(ascan[j]));
      out.push_back({i, j, y});
      out.push_back({j, i, y});
    }
  }
  return out;
}

double penalty_phi(const Vec& y, double gamma) {
  check_gamma(gamma);
  double s = 0.0;
  for (int k = 0; k < y.size(); ++k) {
    s += std::exp(std::min(-y[k] / gamma, kExpClamp));
  }
  return gamma * s;
}

Vec penalty_phi_grad(const Vec& y, double gamma) {
  check_gamma(gamma);
  return phi_prime(y, gamma);
}

// Row k = prefix sums (Q w) of the ascan's k-th assignment row.  The pair
// residual Q(w_i - w_j) is then a plain row difference, which takes the
// O(N^2) pair loops from three passes per pair down to one.
Mat prefix_rows(const AscanView& ascan, const Mat& W) {
  const int n = static_cast<int>(ascan.size());
  const int c = static_cast<int>(W.cols());
  Mat P(n, c);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int m = 0; m < c; ++m) {
      s += W(ascan[k], m);
      P(k, m) = s;
    }
  }
  return P;
}

double ordering_energy(const AscanView& ascan, const Mat& W,
                       const OrderingPenaltyConfig& config) {
  check_gamma(config.gamma);
  check_ascan(ascan, W);
  const int n = static_cast<int>(ascan.size());
  const int c = static_cast<int>(W.cols());
  const Mat P = prefix_rows(ascan, W);
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const int jmax =
        config.pair_window > 0 ? std::min(n - 1, i + config.pair_window) : n - 1;
    for (int j = i + 1; j <= jmax; ++j) {
      double phi = 0.0;
      for (int m = 0; m < c; ++m) {
        phi += std::exp(
            std::min((P(j, m) - P(i, m)) / config.gamma, kExpClamp));
      }
      e += 2.0 * config.gamma * phi;  // both orientations
    }
  }
  return e;
}

Mat ordering_energy_gradient(const AscanView& ascan, const Mat& W,
                             const OrderingPenaltyConfig& config) {
  check_gamma(config.gamma);
  check_ascan(ascan, W);
  const int n = static_cast<int>(ascan.size());
  const int c = static_cast<int>(W.cols());
  const Mat P = prefix_rows(ascan, W);
  Mat grad = Mat::Zero(n, c);
  Vec g(c);
  for (int i = 0; i < n; ++i) {
    const int jmax =
        config.pair_window > 0 ? std::min(n - 1, i + config.pair_window) : n - 1;
    for (int j = i + 1; j <= jmax; ++j) {
      // g = Q^T phi'(y) as a running suffix sum of the clamped exponentials.
      double s = 0.0;
      for (int m = c - 1; m >= 0; --m) {
        s -= std::exp(std::min((P(j, m) - P(i, m)) / config.gamma, kExpClamp));
        g[m] = s;
      }
      grad.row(i) += 2.0 * g.transpose();  // both orientations share the term
      grad.row(j) -= 2.0 * g.transpose();
    }
  }
  return grad;
}

Mat construct_ordered_coupling(const Vec& w_i, const Vec& w_j) {
  if (w_i.size() != w_j.size())
    throw ConfigError("construct_ordered_coupling: dimension mismatch");
  if (!is_ordered(w_i, w_j))
    throw ConfigError("construct_ordered_coupling: pair is not ordered");
  return coupling_fill(w_i, w_j);
}

}  // namespace oaf
