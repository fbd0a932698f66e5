#include "oaf/features.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Kernel1d {
  std::vector<double> taps;  // index i + radius
  int radius = 0;
};

Kernel1d gaussian_kernel(double sigma) {
  Kernel1d k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  k.taps.resize(2 * k.radius + 1);
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k.taps[i + k.radius] = v;
    sum += v;
  }
  for (double& t : k.taps) t /= sum;  // unit DC gain
  return k;
}

// First derivative: antisymmetric taps scaled for exact unit response on a
// unit-slope ramp (sum taps * i = 1; DC vanishes by symmetry).
Kernel1d deriv1_kernel(double sigma) {
  Kernel1d k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  k.taps.resize(2 * k.radius + 1);
  double moment = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double v = i * std::exp(-0.5 * i * i / (sigma * sigma));
    k.taps[i + k.radius] = v;
    moment += v * i;
  }
  for (double& t : k.taps) t /= moment;
  return k;
}

// Second derivative: Laplacian-of-Gaussian profile, DC-corrected so constants
// map to zero, then scaled for exact unit response on i^2/2.
Kernel1d deriv2_kernel(double sigma) {
  Kernel1d k;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int len = 2 * k.radius + 1;
  k.taps.resize(len);
  for (int i = -k.radius; i <= k.radius; ++i) {
    k.taps[i + k.radius] =
        (i * i - sigma * sigma) * std::exp(-0.5 * i * i / (sigma * sigma));
  }
  double mean = 0.0;
  for (double t : k.taps) mean += t;
  mean /= len;
  double moment = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    k.taps[i + k.radius] -= mean;
    moment += k.taps[i + k.radius] * i * i * 0.5;
  }
  for (double& t : k.taps) t /= moment;
  return k;
}

int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

struct AxisKernels {
  Kernel1d g, d1, d2;
};

// Kernels for one axis. An axis of extent 1 is degenerate: smoothing is the
// identity and derivatives along it vanish (exactly what edge replication
// would produce, without the wasted taps). Otherwise the extent must hold at
// least the causal half of the kernel.
AxisKernels kernels_for_axis(double sigma, int dim) {
  if (dim == 1) {
    AxisKernels k;
    k.g.taps = {1.0};
    k.d1.taps = {0.0};
    k.d2.taps = {0.0};
    return k;
  }
  AxisKernels k{gaussian_kernel(sigma), deriv1_kernel(sigma), deriv2_kernel(sigma)};
  if (dim < k.g.radius + 1) {
    throw ConfigError(
        "scale_normalized_derivatives: kernel radius " + std::to_string(k.g.radius) +
        " at scale " + std::to_string(sigma) + " exceeds a volume extent of " +
        std::to_string(dim));
  }
  return k;
}

// Correlation along one axis (0 = depth, 1 = na, 2 = nb) with edge
// replication at the borders.
std::vector<double> apply_axis(const std::vector<double>& in,
                               std::array<int, 3> dims, int axis,
                               const Kernel1d& kernel) {
  const int depth = dims[0], na = dims[1], nb = dims[2];
  std::vector<double> out(in.size());
  for (int b = 0; b < nb; ++b) {
    for (int a = 0; a < na; ++a) {
      for (int k = 0; k < depth; ++k) {
        double acc = 0.0;
        for (int i = -kernel.radius; i <= kernel.radius; ++i) {
          int kk = k, aa = a, bb = b;
          if (axis == 0) kk = clamp_index(k + i, depth);
          else if (axis == 1) aa = clamp_index(a + i, na);
          else bb = clamp_index(b + i, nb);
          acc += kernel.taps[i + kernel.radius] *
                 in[kk + static_cast<std::size_t>(depth) * (aa + static_cast<std::size_t>(na) * bb)];
        }
        out[k + static_cast<std::size_t>(depth) * (a + static_cast<std::size_t>(na) * b)] = acc;
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd scale_normalized_derivatives(const Volume& vol,
                                             const std::vector<double>& scales) {
  validate(vol, "scale_normalized_derivatives");
  if (scales.empty()) {
    throw ConfigError("scale_normalized_derivatives: need at least one scale");
  }
  const std::array<int, 3> dims{vol.depth, vol.na, vol.nb};
  const int n = vol.size();

  std::vector<double> f(vol.voxels.begin(), vol.voxels.end());
  MatrixXd out = MatrixXd::Zero(n, 9);

  for (double sigma : scales) {
    if (!(sigma > 0.0)) {
      throw ConfigError("scale_normalized_derivatives: scales must be positive");
    }
    const AxisKernels kz = kernels_for_axis(sigma, vol.depth);
    const AxisKernels ka = kernels_for_axis(sigma, vol.na);
    const AxisKernels kb = kernels_for_axis(sigma, vol.nb);

    // Separable staging: depth passes first, then A-scan axis, then B-scan
    // axis, sharing intermediates between channels.
    std::vector<double> A = apply_axis(f, dims, 0, kz.g);
    std::vector<double> B = apply_axis(f, dims, 0, kz.d1);
    std::vector<double> C = apply_axis(f, dims, 0, kz.d2);

    std::vector<double> AG = apply_axis(A, dims, 1, ka.g);
    std::vector<double> AD1 = apply_axis(A, dims, 1, ka.d1);
    std::vector<double> AD2 = apply_axis(A, dims, 1, ka.d2);
    std::vector<double> BG = apply_axis(B, dims, 1, ka.g);
    std::vector<double> BD1 = apply_axis(B, dims, 1, ka.d1);
    std::vector<double> CG = apply_axis(C, dims, 1, ka.g);

    const std::vector<double> chan[9] = {
        apply_axis(AD1, dims, 2, kb.g),   // dx
        apply_axis(AG, dims, 2, kb.d1),   // dy
        apply_axis(BG, dims, 2, kb.g),    // dz
        apply_axis(AD1, dims, 2, kb.d1),  // dxy
        apply_axis(BG, dims, 2, kb.d1),   // dyz
        apply_axis(BD1, dims, 2, kb.g),   // dxz
        apply_axis(AD2, dims, 2, kb.g),   // dxx
        apply_axis(AG, dims, 2, kb.d2),   // dyy
        apply_axis(CG, dims, 2, kb.g),    // dzz
    };
    const double normalizer[9] = {sigma,         sigma,         sigma,
                                  sigma * sigma, sigma * sigma, sigma * sigma,
                                  sigma * sigma, sigma * sigma, sigma * sigma};

    for (int ch = 0; ch < 9; ++ch) {
      for (int i = 0; i < n; ++i) {
        const double v = normalizer[ch] * chan[ch][i];
        if (std::abs(v) > std::abs(out(i, ch))) out(i, ch) = v;
      }
    }
  }
  return out;
}

Eigen::MatrixXd feature_vector_field(const Volume& vol,
                                     const std::vector<double>& scales) {
  const MatrixXd deriv = scale_normalized_derivatives(vol, scales);
  const int n = vol.size();
  MatrixXd out(n, kFeatureCount);
  const double rt2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    out(i, 0) = vol.voxels[i];
    out(i, 1) = deriv(i, 0);
    out(i, 2) = deriv(i, 1);
    out(i, 3) = deriv(i, 2);
    out(i, 4) = rt2 * deriv(i, 3);
    out(i, 5) = rt2 * deriv(i, 4);
    out(i, 6) = rt2 * deriv(i, 5);
    out(i, 7) = deriv(i, 6);
    out(i, 8) = deriv(i, 7);
    out(i, 9) = deriv(i, 8);
  }
  return out;
}

std::vector<double> make_patch_weights(std::array<int, 3> patch, double sigma) {
  for (int e : patch) {
    if (e < 1 || e % 2 == 0) {
      throw ConfigError("make_patch_weights: extents must be odd and positive");
    }
  }
  const int count = patch[0] * patch[1] * patch[2];
  std::vector<double> w(count);
  if (sigma <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / count);
    return w;
  }
  const int rk = patch[0] / 2, ra = patch[1] / 2, rb = patch[2] / 2;
  double sum = 0.0;
  int idx = 0;
  for (int ob = -rb; ob <= rb; ++ob) {
    for (int oa = -ra; oa <= ra; ++oa) {
      for (int ok = -rk; ok <= rk; ++ok, ++idx) {
        w[idx] = std::exp(-0.5 * (ok * ok + oa * oa + ob * ob) / (sigma * sigma));
        sum += w[idx];
      }
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

Eigen::MatrixXd region_covariance(const MatrixXd& features,
                                  std::array<int, 3> dims, int center,
                                  std::array<int, 3> patch,
                                  const std::vector<double>& weights,
                                  double eps_reg) {
  const int depth = dims[0], na = dims[1], nb = dims[2];
  const int n = depth * na * nb;
  if (features.rows() != n) {
    throw ConfigError("region_covariance: feature row count does not match dims");
  }
  if (center < 0 || center >= n) {
    throw ConfigError("region_covariance: center voxel out of range");
  }
  for (int e : patch) {
    if (e < 1 || e % 2 == 0) {
      throw ConfigError("region_covariance: extents must be odd and positive");
    }
  }
  if (static_cast<int>(weights.size()) != patch[0] * patch[1] * patch[2]) {
    throw ConfigError("region_covariance: weight count does not match patch");
  }
  if (!(eps_reg > 0.0)) {
    throw ConfigError("region_covariance: eps_reg must be positive");
  }
  double wtotal = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("region_covariance: weights must be nonnegative");
    wtotal += w;
  }
  if (std::abs(wtotal - 1.0) > 1e-9) {
    throw ConfigError("region_covariance: weights must sum to 1");
  }

  const int ck = center % depth;
  const int ca = (center / depth) % na;
  const int cb = center / (depth * na);
  const int rk = patch[0] / 2, ra = patch[1] / 2, rb = patch[2] / 2;

  // Gather surviving offsets (patch clipped at the borders) and renormalize.
  std::vector<int> rows;
  std::vector<double> w;
  rows.reserve(weights.size());
  w.reserve(weights.size());
  double wsum = 0.0;
  int idx = 0;
  for (int ob = -rb; ob <= rb; ++ob) {
    for (int oa = -ra; oa <= ra; ++oa) {
      for (int ok = -rk; ok <= rk; ++ok, ++idx) {
        const int k = ck + ok, a = ca + oa, b = cb + ob;
        if (k < 0 || k >= depth || a < 0 || a >= na || b < 0 || b >= nb) continue;
        if (weights[idx] == 0.0) continue;
        rows.push_back(k + depth * (a + na * b));
        w.push_back(weights[idx]);
        wsum += weights[idx];
      }
    }
  }
  if (rows.empty() || wsum <= 0.0) {
    throw ConfigError("region_covariance: empty clipped patch");
  }

  const Eigen::Index F = features.cols();
  VectorXd mean = VectorXd::Zero(F);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    mean += (w[i] / wsum) * features.row(rows[i]).transpose();
  }
  MatrixXd cov = MatrixXd::Zero(F, F);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    VectorXd d = features.row(rows[i]).transpose() - mean;
    cov += (w[i] / wsum) * d * d.transpose();
  }
  cov += eps_reg * MatrixXd::Identity(F, F);
  return cov;
}

Eigen::MatrixXd build_distance_matrix(const Volume& vol,
                                      const PrototypeDictionary& dict,
                                      const FeatureConfig& config) {
  validate(vol, "build_distance_matrix");
  if (dict.layer_count < 1) {
    throw ConfigError("build_distance_matrix: dictionary has no layers");
  }
  if (dict.dim != kFeatureCount) {
    throw ConfigError("build_distance_matrix: dictionary dimension " +
                      std::to_string(dict.dim) + " does not match feature count " +
                      std::to_string(kFeatureCount));
  }
  const MatrixXd features = feature_vector_field(vol, config.scales);
  const std::vector<double> weights =
      make_patch_weights(config.patch, config.gaussian_patch_sigma);
  const std::array<int, 3> dims{vol.depth, vol.na, vol.nb};

  MatrixXd D(vol.size(), dict.layer_count);
  for (int i = 0; i < vol.size(); ++i) {
    const MatrixXd desc = region_covariance(features, dims, i, config.patch,
                                            weights, config.eps_reg);
    D.row(i) = nearest_prototype_distance(desc, dict).transpose();
  }
  return D;
}

Eigen::MatrixXd ingest_scores(const MatrixXd& scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (!std::isfinite(scores(i, j))) {
        throw ConfigError("ingest_scores: non-finite score in row " +
                          std::to_string(i));
      }
    }
  }
  MatrixXd D = -scores;
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    D.row(i).array() -= D.row(i).minCoeff();
  }
  return D;
}

}  // namespace oaf
