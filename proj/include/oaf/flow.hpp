#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "oaf/ordering.hpp"
#include "oaf/simplex.hpp"

namespace oaf {

// Assignment-flow dynamics: likelihood and similarity maps, the ordering-
// aware generalized likelihood, geometric Euler stepping, and entropy-gated
// integration from the barycenter.

// Sparse symmetric neighborhood in CSR form.  Every voxel lists itself among
// its neighbors; weights are positive and sum to 1 per voxel.
struct NeighborhoodGraph {
  int voxel_count = 0;
  std::vector<std::int64_t> offsets;  // size voxel_count + 1
  std::vector<int> neighbors;
  std::vector<double> weights;
};

void validate(const NeighborhoodGraph& graph);

// Box neighborhood on a (depth, na, nb) grid, clipped at borders, uniform
// weights.  extents are odd box side lengths per axis in the same order.
NeighborhoodGraph build_grid_graph(const std::array<int, 3>& dims,
                                   const std::array<int, 3>& extents);

// One scan per (a, b) column, voxels listed shallow to deep.  Together the
// scans partition [0, n).
std::vector<AscanView> build_ascans(const std::array<int, 3>& dims);

struct FlowConfig {
  double rho = 1.0;    // likelihood scale
  double step = 0.1;   // Euler step length h
  double gamma = 0.1;  // ordering penalty smoothing
  // Mean-entropy stopping level; nonpositive means "auto": 1e-3 * log c.
  double entropy_threshold = 0.0;
  int max_steps = 2000;
  int window = 0;  // ordering pair window; 0 = all pairs per scan
  // Scale on the ordering gradient inside the generalized likelihood.
  // Nonpositive means "auto": 1 / (pairs per voxel * label count).  The raw
  // pair sum grows linearly with scan depth while the distance term does
  // not, so without this normalization the ordering term overwhelms the
  // data at the barycenter start and the flow sorts voxels by depth
  // regardless of D.
  double ordering_weight = 0.0;
  std::array<int, 3> extents{3, 5, 5};
};

struct FlowStepRecord {
  int step = 0;
  double mean_entropy = 0.0;
  double ordering_energy = 0.0;
  double wall_time_s = 0.0;
  double row_sum_drift = 0.0;  // max |row sum - 1| before re-clamping
};

struct FlowTrace {
  std::vector<FlowStepRecord> steps;
  bool converged = false;
};

// Row i = W_i * exp(-D_i / rho), renormalized.
Mat likelihood(const Mat& W, const Mat& D, double rho);

// Row i = normalized entrywise weighted geometric mean of the L rows in
// N_i.  The closed form is independent of the base point; the base argument
// is kept for shape validation only.
Mat similarity(const Mat& base, const Mat& L, const NeighborhoodGraph& graph);

// Likelihood with the ordering-energy gradient folded into the exponent:
// row-wise exp_lifted of W at (-D/rho - grad E_ord).  With ordered == false
// this is exactly likelihood().
Mat generalized_likelihood(const Mat& W, const Mat& D,
                           const std::vector<AscanView>& ascans,
                           const FlowConfig& config, bool ordered);

// One geometric Euler step W+_i = exp_lifted(W_i, h * S_i), rows re-clamped
// to the simplex interior.  h == 0 returns W unchanged.  If drift is given
// it receives the pre-clamp row-sum deviation.
Mat flow_step(const Mat& W, const Mat& D, const NeighborhoodGraph& graph,
              const std::vector<AscanView>& ascans, const FlowConfig& config,
              bool ordered, double* drift = nullptr);

struct FlowResult {
  Mat assignment;
  FlowTrace trace;
};

// Runs the flow from the barycenter until mean entropy falls below the
// threshold or max_steps is exhausted; the latter is flagged in the trace,
// not thrown.
FlowResult integrate(const Mat& D, const NeighborhoodGraph& graph,
                     const std::vector<AscanView>& ascans,
                     const FlowConfig& config, bool ordered);

// Argmax per row; ties break toward the smaller label.
std::vector<int> round_labels(const Mat& W);

}  // namespace oaf
