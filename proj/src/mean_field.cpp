#include "ccgp/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccgp/math.hpp"

namespace ccgp {

namespace {

void update_f_tilde(VariationalState& s, double tau) {
  const Index n = s.mu.rows();
  const Index c_count = s.mu.cols();
  for (Index c = 0; c < c_count; ++c) {
    for (Index i = 0; i < n; ++i) {
      s.f_tilde(i, c) =
          std::sqrt(s.mu(i, c) * s.mu(i, c) + s.sigma[c](i, i)) / tau;
    }
  }
}

void update_gamma(VariationalState& s, double tau) {
  const Index n = s.mu.rows();
  const Index c_count = s.mu.cols();
  const double log_2c = std::log(2.0 * static_cast<double>(c_count));
  for (Index i = 0; i < n; ++i) {
    const double psi_alpha = digamma(s.alpha[i]);
    for (Index c = 0; c < c_count; ++c) {
      double expo = psi_alpha - s.mu(i, c) / (2.0 * tau);
      expo = std::clamp(expo, -30.0, 30.0);
      s.gamma(i, c) = std::exp(expo - log_2c - log_cosh(s.f_tilde(i, c) / 2.0));
    }
  }
}

void update_omega_bar(VariationalState& s, const Mat& Y) {
  const Index n = s.mu.rows();
  const Index c_count = s.mu.cols();
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < c_count; ++c)
      s.omega_bar(i, c) = pg_mean(s.gamma(i, c) + Y(i, c), s.f_tilde(i, c));
}

// q2(F) update for one class. With S = diag(sqrt(omega)/tau):
//   Sigma = (S^2 + K^{-1})^{-1} = K - K S (I + S K S)^{-1} S K,
//   mu    = Sigma (y - gamma)/(2 tau) + (a - K S (I + S K S)^{-1} S a),
// so no solve against K itself is needed; I + SKS has eigenvalues >= 1.
void update_gaussian(VariationalState& s, const Mat& Y, const GramBundle& bundle,
                     double tau, Index c) {
  const Vec sv = s.omega_bar.col(c).cwiseSqrt() / tau;
  const Mat ks = bundle.K * sv.asDiagonal();                 // K S
  Mat b = sv.asDiagonal() * ks;                              // S K S
  b.diagonal().array() += 1.0;
  Eigen::LLT<Mat> llt(b);
  if (llt.info() != Eigen::Success) {
    throw EpisodeAbort("mf_sweep: inner factorization failed (non-finite state?)");
  }
  Mat sigma = bundle.K - ks * llt.solve(ks.transpose());
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  const Vec rhs = (Y.col(c) - s.gamma.col(c)) / (2.0 * tau);
  const Vec sa = sv.cwiseProduct(bundle.a);
  s.mu.col(c) = sigma * rhs + bundle.a - ks * llt.solve(sa);
  s.sigma[static_cast<std::size_t>(c)] = std::move(sigma);
}

}  // namespace

VariationalState init_state(const Mat& Y, const GramBundle& bundle, double tau) {
  const Index n = Y.rows();
  const Index c_count = Y.cols();
  VariationalState s;
  s.mu = bundle.a.replicate(1, c_count);
  s.sigma.assign(static_cast<std::size_t>(c_count), bundle.K);
  s.alpha = Vec::Constant(n, static_cast<double>(c_count));
  s.gamma.resize(n, c_count);
  s.omega_bar.resize(n, c_count);
  s.f_tilde.resize(n, c_count);
  update_f_tilde(s, tau);
  update_gamma(s, tau);
  update_omega_bar(s, Y);
  return s;
}

void mf_update_gaussian_block(VariationalState& s, const Mat& Y,
                              const GramBundle& bundle, double tau) {
  for (Index c = 0; c < Y.cols(); ++c) update_gaussian(s, Y, bundle, tau, c);
}

void mf_sweep(VariationalState& s, const Mat& Y, const GramBundle& bundle,
              double tau) {
  update_f_tilde(s, tau);
  update_gamma(s, tau);
  s.alpha = s.gamma.rowwise().sum().array() + 1.0;
  update_omega_bar(s, Y);
  mf_update_gaussian_block(s, Y, bundle, tau);
  if ((s.omega_bar.array() < 0.0).any()) {
    throw std::logic_error("mf_sweep: negative omega_bar");
  }
}

MfRun run_mean_field(const Eigen::Ref<const Mat>& X,
                     const std::vector<int>& labels, int num_classes,
                     const HyperParams& hyper, double prior_mean,
                     const MfOptions& opts) {
  if (opts.steps < 1) throw std::invalid_argument("run_mean_field: steps >= 1");
  MfRun run;
  run.bundle = make_bundle(hyper, X, prior_mean);
  const Mat Y = one_hot(labels, num_classes);
  run.state = init_state(Y, run.bundle, hyper.tau);
  for (int k = 0; k < opts.steps; ++k) {
    const Mat mu_prev = run.state.mu;
    mf_sweep(run.state, Y, run.bundle, hyper.tau);
    run.last_delta = (run.state.mu - mu_prev).cwiseAbs().maxCoeff();
    run.sweeps = k + 1;
    if (opts.early_stop && run.last_delta < opts.tol) break;
  }
  return run;
}

}  // namespace ccgp
