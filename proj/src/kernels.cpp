#include "ccgp/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ccgp {

namespace {

constexpr double kZeroNormSq = 1e-280;

// Unit-sphere projection shared by map_features and the cosine kernel:
// rows with (numerically) zero norm map to the first basis vector.
Mat normalize_rows(Mat Z) {
  for (Index i = 0; i < Z.rows(); ++i) {
    const double n2 = Z.row(i).squaredNorm();
    if (n2 < kZeroNormSq) {
      Z.row(i).setZero();
      Z(i, 0) = 1.0;
    } else {
      Z.row(i) /= std::sqrt(n2);
    }
  }
  return Z;
}

}  // namespace

Mat map_features(const FeatureMap& fm, const Eigen::Ref<const Mat>& X) {
  if (X.cols() != fm.weights.cols()) {
    throw std::invalid_argument("map_features: input dimension mismatch");
  }
  Mat Z = X * fm.weights.transpose();
  if (fm.normalize) Z = normalize_rows(std::move(Z));
  return Z;
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "cosine") return KernelKind::cosine;
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  if (name == "matern52") return KernelKind::matern52;
  if (name == "poly1") return KernelKind::poly1;
  if (name == "poly2") return KernelKind::poly2;
  throw std::invalid_argument("unknown kernel kind: " + name);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::cosine: return "cosine";
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::matern52: return "matern52";
    case KernelKind::poly1: return "poly1";
    case KernelKind::poly2: return "poly2";
  }
  return "?";
}

Mat gram(const KernelSpec& spec, const Eigen::Ref<const Mat>& Z,
         const Eigen::Ref<const Mat>& Zp) {
  if (Z.cols() != Zp.cols()) {
    throw std::invalid_argument("gram: feature dimension mismatch");
  }
  Mat K;
  switch (spec.kind) {
    case KernelKind::cosine:
      K = normalize_rows(Z) * normalize_rows(Zp).transpose();
      break;
    case KernelKind::linear:
      K = Z * Zp.transpose();
      break;
    case KernelKind::rbf:
    case KernelKind::matern52: {
      Mat d2 = (-2.0 * Z * Zp.transpose()).colwise() + Z.rowwise().squaredNorm();
      d2.rowwise() += Zp.rowwise().squaredNorm().transpose();
      d2 = d2.cwiseMax(0.0);
      if (spec.kind == KernelKind::rbf) {
        K = (-d2 / (2.0 * spec.lengthscale * spec.lengthscale)).array().exp();
      } else {
        const Mat r = d2.cwiseSqrt() * (std::sqrt(5.0) / spec.lengthscale);
        K = (1.0 + r.array() + r.array().square() / 3.0) * (-r.array()).exp();
      }
      break;
    }
    case KernelKind::poly1:
      K = (Z * Zp.transpose()).array() + spec.offset;
      break;
    case KernelKind::poly2:
      K = ((Z * Zp.transpose()).array() + spec.offset).square();
      break;
  }
  return spec.output_scale * K;
}

Vec gram_diag(const KernelSpec& spec, const Eigen::Ref<const Mat>& Z) {
  const Index n = Z.rows();
  Vec d(n);
  switch (spec.kind) {
    case KernelKind::cosine:
    case KernelKind::rbf:
    case KernelKind::matern52:
      d.setConstant(1.0);
      break;
    case KernelKind::linear:
      d = Z.rowwise().squaredNorm();
      break;
    case KernelKind::poly1:
      d = Z.rowwise().squaredNorm().array() + spec.offset;
      break;
    case KernelKind::poly2:
      d = (Z.rowwise().squaredNorm().array() + spec.offset).square();
      break;
  }
  return spec.output_scale * d;
}

Mat PsdFactor::solve(const Eigen::Ref<const Mat>& B) const {
  if (B.rows() != L.rows()) throw std::invalid_argument("solve_psd: shape mismatch");
  // two triangular solves; no explicit inverse
  Mat Y = L.triangularView<Eigen::Lower>().solve(B);
  return L.transpose().triangularView<Eigen::Upper>().solve(Y);
}

Vec PsdFactor::solve_vec(const Eigen::Ref<const Vec>& b) const {
  return solve(Mat(b)).col(0);
}

double PsdFactor::log_det() const {
  return 2.0 * L.diagonal().array().log().sum();
}

PsdFactor chol_jitter(const Eigen::Ref<const Mat>& K) {
  if (K.rows() != K.cols()) throw std::invalid_argument("chol_jitter: not square");
  if (K.rows() > 0 && (K - K.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("chol_jitter: matrix not symmetric");
  }
  double scale = K.rows() > 0 ? K.diagonal().mean() : 1.0;
  if (!(scale > 0.0)) scale = 1.0;
  for (double level : {1e-6, 1e-5, 1e-4, 1e-3}) {
    const double jitter = level * scale;
    Eigen::LLT<Mat> llt(Mat(K + jitter * Mat::Identity(K.rows(), K.cols())));
    if (llt.info() == Eigen::Success) {
      PsdFactor f;
      f.L = llt.matrixL();
      f.jitter = jitter;
      return f;
    }
  }
  throw EpisodeAbort("chol_jitter: factorization failed after jitter escalation");
}

GramBundle make_bundle(const HyperParams& hyper, const Eigen::Ref<const Mat>& X,
                       double prior_mean) {
  GramBundle b;
  const Mat Z = map_features(hyper.feature_map, X);
  b.K = gram(hyper.kernel, Z, Z);
  b.K = 0.5 * (b.K + b.K.transpose()).eval();  // kill round-off asymmetry
  b.chol = chol_jitter(b.K);
  b.K.diagonal().array() += b.chol.jitter;
  b.a = Vec::Constant(X.rows(), prior_mean);
  return b;
}

namespace {

bool has_lengthscale(KernelKind k) {
  return k == KernelKind::rbf || k == KernelKind::matern52;
}

bool has_offset(KernelKind k) {
  return k == KernelKind::poly1 || k == KernelKind::poly2;
}

}  // namespace

Index theta_size(const HyperParams& hyper) {
  Index n = hyper.feature_map.weights.size() + 1;  // + log output_scale
  if (has_lengthscale(hyper.kernel.kind) || has_offset(hyper.kernel.kind)) ++n;
  return n;
}

Vec theta_pack(const HyperParams& hyper) {
  const Mat& W = hyper.feature_map.weights;
  Vec theta(theta_size(hyper));
  Index k = 0;
  for (Index i = 0; i < W.rows(); ++i)
    for (Index j = 0; j < W.cols(); ++j) theta[k++] = W(i, j);
  theta[k++] = std::log(hyper.kernel.output_scale);
  if (has_lengthscale(hyper.kernel.kind)) theta[k++] = std::log(hyper.kernel.lengthscale);
  else if (has_offset(hyper.kernel.kind)) theta[k++] = hyper.kernel.offset;
  return theta;
}

HyperParams theta_unpack(const HyperParams& prototype,
                         const Eigen::Ref<const Vec>& theta) {
  if (theta.size() != theta_size(prototype)) {
    throw std::invalid_argument("theta_unpack: size mismatch");
  }
  HyperParams h = prototype;
  Mat& W = h.feature_map.weights;
  Index k = 0;
  for (Index i = 0; i < W.rows(); ++i)
    for (Index j = 0; j < W.cols(); ++j) W(i, j) = theta[k++];
  h.kernel.output_scale = std::exp(theta[k++]);
  if (has_lengthscale(h.kernel.kind)) h.kernel.lengthscale = std::exp(theta[k++]);
  else if (has_offset(h.kernel.kind)) h.kernel.offset = theta[k++];
  return h;
}

std::vector<bool> theta_feature_mask(const HyperParams& hyper) {
  std::vector<bool> mask(static_cast<std::size_t>(theta_size(hyper)), false);
  for (Index i = 0; i < hyper.feature_map.weights.size(); ++i) mask[i] = true;
  return mask;
}

}  // namespace ccgp
