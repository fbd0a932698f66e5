#pragma once

#include <Eigen/Dense>

namespace oaf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Rows of an assignment matrix are clamped to this floor and renormalized
// whenever an operation could push them out of the open simplex. Keeps
// logarithms finite without visibly perturbing the assignment.
inline constexpr double kSimplexFloor = 1e-12;

// Uniform distribution over c labels (the simplex barycenter).
Vec barycenter(int c);

// n-row matrix with every row equal to the barycenter.
Mat barycenter_matrix(int n, int c);

// Orthogonal projection onto the tangent space: x - mean(x) * 1.
Vec project_tangent(const Vec& x);

// Replicator map R_p x = Diag(p) x - <p,x> p. Annihilates constant vectors
// and commutes with project_tangent.
Vec replicator_map(const Vec& p, const Vec& x);

// Exponential map of the e-connection at p applied to a tangent vector v:
// p * e^{v/p} normalized. v == 0 returns p exactly. The quotient v/p is
// max-shifted before exponentiation so large tangents cannot overflow;
// normalization cancels the shift.
Vec exp_affine(const Vec& p, const Vec& v);

// Inverse of exp_affine: R_p log(q/p). q must lie in the simplex interior.
Vec exp_affine_inverse(const Vec& p, const Vec& q);

// Lifted map exp_p = Exp_p after R_p, which collapses to normalizing
// p * e^x. Invariant to adding a constant to x.
Vec exp_lifted(const Vec& p, const Vec& x);

// Row-wise lifting of exp_lifted: row i of the result is
// exp_lifted(W.row(i), X.row(i)).
Mat exp_lifted_rows(const Mat& W, const Mat& X);

// Average entropy of the rows, in [0, log c]. Row entropies are combined
// with a fixed-order pairwise summation so the result does not depend on
// any parallel partitioning of the rows.
double mean_entropy(const Mat& W);

// Clamp every entry to kSimplexFloor and renormalize each row. Returns the
// largest per-row drift |sum - 1| observed before renormalization, which
// the flow integrator tracks as a conservation diagnostic.
double clamp_interior(Mat& W);

}  // namespace oaf
