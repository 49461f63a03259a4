#include "ccgp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "ccgp/math.hpp"

namespace ccgp {

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1");
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  GaussHermite gh;
  gh.nodes = es.eigenvalues();
  gh.weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = sqrt_pi * v0 * v0;
  }
  return gh;
}

double log_evidence_gh(const std::vector<int>& labels, int num_classes,
                       const GramBundle& bundle, double tau, int nodes) {
  const Index n = static_cast<Index>(labels.size());
  const Index c_count = num_classes;
  const Index dim = n * c_count;
  if (dim > 6) throw std::invalid_argument("log_evidence_gh: N*C too large for dense rule");
  const GaussHermite gh = gauss_hermite(nodes);
  const Mat& l = bundle.chol.L;  // factor of K + jitter I

  // odometer over all node multi-indices; block c of the index vector holds
  // the N latent coordinates of class c via f^c = a + sqrt(2) L x
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Mat f(n, c_count);
  Vec fn(c_count);
  double total = 0.0;
  const double sqrt2 = std::sqrt(2.0);
  for (;;) {
    double w = 1.0;
    for (Index d = 0; d < dim; ++d) w *= gh.weights[idx[static_cast<std::size_t>(d)]];
    for (Index c = 0; c < c_count; ++c) {
      for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Index k = 0; k <= i; ++k) {
          acc += l(i, k) * gh.nodes[idx[static_cast<std::size_t>(c * n + k)]];
        }
        f(i, c) = bundle.a[i] + sqrt2 * acc;
      }
    }
    double like = 1.0;
    for (Index i = 0; i < n; ++i) {
      fn = f.row(i).transpose();
      like *= logistic_softmax(fn, tau)[labels[static_cast<std::size_t>(i)]];
    }
    total += w * like;

    Index d = 0;
    for (; d < dim; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < nodes) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == dim) break;
  }
  return std::log(total) - 0.5 * static_cast<double>(dim) * std::log(M_PI);
}

}  // namespace ccgp
