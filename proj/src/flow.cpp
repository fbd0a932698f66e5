#include "oaf/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

void check_dims(const Mat& W, const Mat& D) {
  if (W.rows() != D.rows() || W.cols() != D.cols())
    throw ConfigError("flow: assignment and distance shapes differ");
}

void check_partition(const std::vector<AscanView>& ascans, int n) {
  std::vector<char> seen(n, 0);
  std::int64_t covered = 0;
  for (const auto& scan : ascans) {
    for (int r : scan) {
      if (r < 0 || r >= n || seen[r])
        throw ConfigError("flow: ascans must partition the voxel index range");
      seen[r] = 1;
      ++covered;
    }
  }
  if (covered != n)
    throw ConfigError("flow: ascans must partition the voxel index range");
}

// Explicit positive weight is taken as-is; otherwise normalize by the worst
// per-row gradient magnitude at the barycenter start, 2 * partners * c (pair
// multiplicity counting both orientations times |Q^T phi'(0)|_inf).  That
// caps the ordering force on any row at about one distance-gap unit for any
// scan depth, so the data term is never drowned out, while a forming
// violation still blows up exponentially past the cap.
double ordering_gradient_weight(const FlowConfig& config,
                                std::size_t scan_size, int label_count) {
  if (config.ordering_weight > 0.0) return config.ordering_weight;
  const auto n = static_cast<long long>(scan_size);
  if (n < 2) return 0.0;
  const long long partners =
      config.window == 0
          ? n - 1
          : std::min<long long>(n - 1, 2LL * config.window);
  return 1.0 / static_cast<double>(2 * partners * label_count);
}

double resolved_threshold(const FlowConfig& config, int c) {
  const double logc = std::log(static_cast<double>(c));
  const double t =
      config.entropy_threshold > 0.0 ? config.entropy_threshold : 1e-3 * logc;
  if (t >= logc)
    throw ConfigError("flow: entropy_threshold must be below log(label_count)");
  return t;
}

void check_config(const FlowConfig& config) {
  if (!(config.rho > 0.0)) throw ConfigError("flow: rho must be positive");
  if (!(config.step > 0.0)) throw ConfigError("flow: step must be positive");
  if (!(config.gamma > 0.0)) throw ConfigError("flow: gamma must be positive");
  if (config.max_steps < 1)
    throw ConfigError("flow: max_steps must be positive");
  if (config.window < 0) throw ConfigError("flow: window must be >= 0");
}

double total_ordering_energy(const Mat& W, const std::vector<AscanView>& ascans,
                             const FlowConfig& config) {
  OrderingPenaltyConfig pen{config.gamma, config.window};
  double e = 0.0;
  for (const auto& scan : ascans) e += ordering_energy(scan, W, pen);
  return e;
}

}  // namespace

void validate(const NeighborhoodGraph& graph) {
  const int n = graph.voxel_count;
  if (n < 1) throw ConfigError("graph: empty");
  if (graph.offsets.size() != static_cast<std::size_t>(n) + 1 ||
      graph.offsets.front() != 0 ||
      graph.offsets.back() != static_cast<std::int64_t>(graph.neighbors.size()) ||
      graph.neighbors.size() != graph.weights.size())
    throw ConfigError("graph: inconsistent CSR layout");
  for (int i = 0; i < n; ++i) {
    if (graph.offsets[i + 1] <= graph.offsets[i])
      throw ConfigError("graph: voxel with empty neighborhood");
    double sum = 0.0;
    bool self = false;
    for (std::int64_t t = graph.offsets[i]; t < graph.offsets[i + 1]; ++t) {
      const int k = graph.neighbors[t];
      if (k < 0 || k >= n) throw ConfigError("graph: neighbor out of range");
      if (!(graph.weights[t] > 0.0))
        throw ConfigError("graph: weights must be positive");
      sum += graph.weights[t];
      self |= (k == i);
      // Symmetry: i must appear in k's list (lists are sorted).
      const auto lo = graph.neighbors.begin() + graph.offsets[k];
      const auto hi = graph.neighbors.begin() + graph.offsets[k + 1];
      if (!std::binary_search(lo, hi, i))
        throw ConfigError("graph: neighborhood relation is not symmetric");
    }
    if (!self) throw ConfigError("graph: voxel missing from own neighborhood");
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("graph: weights must sum to 1 per voxel");
  }
}

NeighborhoodGraph build_grid_graph(const std::array<int, 3>& dims,
                                   const std::array<int, 3>& extents) {
  for (int d : dims)
    if (d < 1) throw ConfigError("graph: dims must be positive");
  for (int e : extents)
    if (e < 1 || e % 2 == 0)
      throw ConfigError("graph: extents must be odd and positive");

  const int depth = dims[0], na = dims[1], nb = dims[2];
  const int rk = extents[0] / 2, ra = extents[1] / 2, rb = extents[2] / 2;
  NeighborhoodGraph g;
  g.voxel_count = depth * na * nb;
  g.offsets.reserve(g.voxel_count + 1);
  g.offsets.push_back(0);

  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a < na; ++a) {
      for (int k = 0; k < depth; ++k) {
        const int b0 = std::max(0, b - rb), b1 = std::min(nb - 1, b + rb);
        const int a0 = std::max(0, a - ra), a1 = std::min(na - 1, a + ra);
        const int k0 = std::max(0, k - rk), k1 = std::min(depth - 1, k + rk);
        // Emission order (b', a', k') yields sorted voxel indices.
        for (int bb = b0; bb <= b1; ++bb)
          for (int aa = a0; aa <= a1; ++aa)
            for (int kk = k0; kk <= k1; ++kk)
              g.neighbors.push_back(kk + depth * (aa + na * bb));
        const std::int64_t deg =
            static_cast<std::int64_t>(g.neighbors.size()) - g.offsets.back();
        const double w = 1.0 / static_cast<double>(deg);
        g.weights.insert(g.weights.end(), deg, w);
        g.offsets.push_back(static_cast<std::int64_t>(g.neighbors.size()));
      }
    }
  }
  return g;
}

std::vector<AscanView> build_ascans(const std::array<int, 3>& dims) {
  for (int d : dims)
    if (d < 1) throw ConfigError("flow: dims must be positive");
  const int depth = dims[0], na = dims[1], nb = dims[2];
  std::vector<AscanView> scans;
  scans.reserve(static_cast<std::size_t>(na) * nb);
  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a < na; ++a) {
      AscanView scan(depth);
      for (int k = 0; k < depth; ++k) scan[k] = k + depth * (a + na * b);
      scans.push_back(std::move(scan));
    }
  }
  return scans;
}

Mat likelihood(const Mat& W, const Mat& D, double rho) {
  check_dims(W, D);
  if (!(rho > 0.0)) throw ConfigError("flow: rho must be positive");
  Mat L = exp_lifted_rows(W, -D / rho);
  clamp_interior(L);  // extreme distances can underflow entries to exact 0
  return L;
}

Mat similarity(const Mat& base, const Mat& L, const NeighborhoodGraph& graph) {
  if (base.rows() != L.rows() || base.cols() != L.cols())
    throw ConfigError("flow: similarity shape mismatch");
  if (L.rows() != graph.voxel_count)
    throw ConfigError("flow: graph size does not match assignment rows");
  const int n = static_cast<int>(L.rows());
  const int c = static_cast<int>(L.cols());
  if (L.minCoeff() <= 0.0)
    throw ConfigError("flow: similarity requires strictly positive entries");

  Mat logL = L.array().log().matrix();
  Mat S(n, c);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(c);
    for (std::int64_t t = graph.offsets[i]; t < graph.offsets[i + 1]; ++t) {
      acc += graph.weights[t] * logL.row(graph.neighbors[t]);
    }
    const double shift = acc.maxCoeff();
    Eigen::RowVectorXd e = (acc.array() - shift).exp();
    S.row(i) = e / e.sum();
  }
  return S;
}

Mat generalized_likelihood(const Mat& W, const Mat& D,
                           const std::vector<AscanView>& ascans,
                           const FlowConfig& config, bool ordered) {
  check_dims(W, D);
  if (!(config.rho > 0.0)) throw ConfigError("flow: rho must be positive");
  check_partition(ascans, static_cast<int>(W.rows()));
  Mat X = -D / config.rho;
  if (ordered) {
    OrderingPenaltyConfig pen{config.gamma, config.window};
    for (const auto& scan : ascans) {
      const double w = ordering_gradient_weight(config, scan.size(),
                                                static_cast<int>(W.cols()));
      if (w == 0.0) continue;
      Mat g = ordering_energy_gradient(scan, W, pen);
      for (std::size_t k = 0; k < scan.size(); ++k) {
        X.row(scan[k]) -= w * g.row(static_cast<int>(k));
      }
    }
  }
  Mat L = exp_lifted_rows(W, X);
  clamp_interior(L);
  return L;
}

Mat flow_step(const Mat& W, const Mat& D, const NeighborhoodGraph& graph,
              const std::vector<AscanView>& ascans, const FlowConfig& config,
              bool ordered, double* drift) {
  if (config.step == 0.0) {
    if (drift) *drift = 0.0;
    return W;
  }
  if (!(config.step > 0.0)) throw ConfigError("flow: step must be >= 0");
  Mat L = ordered ? generalized_likelihood(W, D, ascans, config, true)
                  : likelihood(W, D, config.rho);
  Mat S = similarity(W, L, graph);
  Mat next = exp_lifted_rows(W, config.step * S);
  const double d = clamp_interior(next);
  if (drift) *drift = d;
  return next;
}

FlowResult integrate(const Mat& D, const NeighborhoodGraph& graph,
                     const std::vector<AscanView>& ascans,
                     const FlowConfig& config, bool ordered) {
  check_config(config);
  const int n = static_cast<int>(D.rows());
  const int c = static_cast<int>(D.cols());
  if (n < 1 || c < 2) throw ConfigError("flow: need n >= 1 voxels, c >= 2 labels");
  if (n != graph.voxel_count)
    throw ConfigError("flow: graph size does not match distance rows");
  check_partition(ascans, n);
  const double threshold = resolved_threshold(config, c);

  // Per-row min subtraction: a no-op for the dynamics (constant-shift
  // invariance) that keeps exponents tame for badly scaled inputs.
  Mat Dn = D;
  for (int i = 0; i < n; ++i) Dn.row(i).array() -= D.row(i).minCoeff();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  FlowResult res;
  res.assignment = barycenter_matrix(n, c);
  res.trace.steps.push_back(
      {0, mean_entropy(res.assignment),
       ordered ? total_ordering_energy(res.assignment, ascans, config) : 0.0,
       elapsed(), 0.0});

  for (int step = 1; step <= config.max_steps; ++step) {
    double drift = 0.0;
    res.assignment =
        flow_step(res.assignment, Dn, graph, ascans, config, ordered, &drift);
    const double me = mean_entropy(res.assignment);
    res.trace.steps.push_back(
        {step, me,
         ordered ? total_ordering_energy(res.assignment, ascans, config) : 0.0,
         elapsed(), drift});
    if (me <= threshold) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

std::vector<int> round_labels(const Mat& W) {
  const int n = static_cast<int>(W.rows());
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < W.cols(); ++j) {
      if (W(i, j) > W(i, best)) best = j;  // ties keep the smaller index
    }
    labels[i] = best;
  }
  return labels;
}

}  // namespace oaf
