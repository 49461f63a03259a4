#pragma once

#include <string>
#include <vector>

#include "ccgp/types.hpp"

namespace ccgp {

/// Learnable linear stand-in for a deep feature extractor: x -> W x,
/// optionally projected to the unit sphere (zero vectors map to e_1).
struct FeatureMap {
  Mat weights;            // d' x d
  bool normalize = true;
};

Mat map_features(const FeatureMap& fm, const Eigen::Ref<const Mat>& X);

enum class KernelKind { cosine, linear, rbf, matern52, poly1, poly2 };

KernelKind kernel_kind_from_string(const std::string& name);
std::string to_string(KernelKind kind);

struct KernelSpec {
  KernelKind kind = KernelKind::cosine;
  double output_scale = 1.0;
  double lengthscale = 1.0;  // rbf / matern52
  double offset = 0.0;       // poly kernels
};

/// Cross-gram matrix in feature space: entry (i,j) = output_scale * kappa(z_i, z'_j).
Mat gram(const KernelSpec& spec, const Eigen::Ref<const Mat>& Z,
         const Eigen::Ref<const Mat>& Zp);

/// Diagonal of gram(spec, Z, Z) without forming the full matrix.
Vec gram_diag(const KernelSpec& spec, const Eigen::Ref<const Mat>& Z);

/// Task-common hyperparameters. tau and the prior-mean policy are fixed
/// settings; the feature map and kernel parameters are meta-learned.
struct HyperParams {
  FeatureMap feature_map;
  KernelSpec kernel;
  double tau = 0.2;
  double prior_mean_train = 0.0;
  double prior_mean_test = 0.0;
};

/// Cholesky factor of K + jitter*I with escalating jitter
/// {1e-6,1e-5,1e-4,1e-3} * mean(diag K). Throws EpisodeAbort if the last
/// level still fails.
struct PsdFactor {
  Mat L;               // lower triangular
  double jitter = 0.0; // the jitter actually absorbed

  Index size() const { return L.rows(); }
  Mat solve(const Eigen::Ref<const Mat>& B) const;
  Vec solve_vec(const Eigen::Ref<const Vec>& b) const;
  double log_det() const;  // of K + jitter*I
};

PsdFactor chol_jitter(const Eigen::Ref<const Mat>& K);

inline Mat solve_psd(const PsdFactor& chol, const Eigen::Ref<const Mat>& B) {
  return chol.solve(B);
}

/// Per-task Gram data shared by all classes: the (single) kernel matrix, its
/// factor, and the constant prior mean vector. K already carries the jitter
/// chosen by chol_jitter, so every consumer (sweeps, ELBO, Gibbs, prediction
/// solves) sees the same effective prior covariance.
struct GramBundle {
  Mat K;          // N x N, jitter absorbed; equals chol.L * chol.L^T
  PsdFactor chol;
  Vec a;          // prior mean, constant per the mean policy
};

GramBundle make_bundle(const HyperParams& hyper, const Eigen::Ref<const Mat>& X,
                       double prior_mean);

// --- Flattened view of the learnable parameters -----------------------------
//
// Layout: feature-map weights row-major, then log(output_scale), then
// log(lengthscale) (rbf/matern52) or offset (poly kernels). tau and the
// prior means are fixed settings and do not appear.

Index theta_size(const HyperParams& hyper);
Vec theta_pack(const HyperParams& hyper);
HyperParams theta_unpack(const HyperParams& prototype, const Eigen::Ref<const Vec>& theta);
/// true for coordinates belonging to the feature map (per-group learning rates)
std::vector<bool> theta_feature_mask(const HyperParams& hyper);

}  // namespace ccgp
