#pragma once

#include <vector>

#include "oaf/simplex.hpp"

namespace oaf {

// Layer-ordering machinery for assignment rows along depth scans.  A pair of
// assignment vectors (w_i shallow, w_j deep) is "ordered" when the prefix
// sums of w_i dominate those of w_j, i.e. mass only moves toward deeper
// layers as depth increases.

struct OrderingOperator {
  int label_count = 0;
  Mat B;  // lower bidiagonal: -1 on the diagonal, +1 on the subdiagonal
  Mat Q;  // lower-triangular all-ones; satisfies B * (-Q) = I exactly
};

OrderingOperator make_ordering_operator(int label_count);

struct OrderingPenaltyConfig {
  double gamma = 0.1;
  // Pairs (i, j) with |i - j| <= pair_window contribute; 0 means every pair
  // in the scan.
  int pair_window = 0;
};

// Row indices of an assignment matrix forming one depth scan, shallow first.
using AscanView = std::vector<int>;

bool is_ordered(const Vec& w_i, const Vec& w_j);

struct PairResidual {
  int i = 0;  // scan positions, not matrix rows
  int j = 0;
  Vec y;  // Q(w_shallow - w_deep); >= 0 iff the pair is ordered
};

// Residuals for every ordered index pair (i, j), i != j, within the window.
// Both orientations of a geometric pair appear and carry the same vector.
std::vector<PairResidual> order_residuals(const AscanView& ascan, const Mat& W,
                                          int window);

// phi(y) = gamma * sum_k exp(-y_k / gamma), a smooth barrier against
// negative residual entries.  Exponents saturate at 700 so violated
// constraints yield a large finite penalty instead of overflow.
double penalty_phi(const Vec& y, double gamma);
Vec penalty_phi_grad(const Vec& y, double gamma);

double ordering_energy(const AscanView& ascan, const Mat& W,
                       const OrderingPenaltyConfig& config);

// Euclidean gradient of ordering_energy w.r.t. each scan row; row k of the
// result corresponds to W row ascan[k].
Mat ordering_energy_gradient(const AscanView& ascan, const Mat& W,
                             const OrderingPenaltyConfig& config);

// For an ordered pair, constructs a coupling M with row marginals w_i, column
// marginals w_j, M >= 0 and zero mass strictly below the diagonal (so
// <Q - I, M> = 0).  Such a coupling exists exactly when the pair is ordered;
// unordered input raises ConfigError.
Mat construct_ordered_coupling(const Vec& w_i, const Vec& w_j);

}  // namespace oaf
