#include "ccgp/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "ccgp/math.hpp"
#include "ccgp/polya_gamma.hpp"

namespace ccgp {

namespace {

constexpr double kLog2 = 0.6931471805599453;

double log_normal_density(const Vec& x, const Vec& mean, const PsdFactor& chol) {
  const Vec r = x - mean;
  const double quad = r.dot(chol.solve_vec(r));
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * M_PI) +
                 chol.log_det() + quad);
}

// Covariance factor of (diag(omega/tau^2) + K^{-1})^{-1} and its mean action,
// same Woodbury route as the mean-field update.
struct GaussianConditional {
  Mat sigma;
  Vec mean;
};

GaussianConditional f_conditional(const Vec& omega_col, const Vec& y_minus_m,
                                  const GramBundle& bundle, double tau) {
  const Vec sv = omega_col.cwiseSqrt() / tau;
  const Mat ks = bundle.K * sv.asDiagonal();
  Mat b = sv.asDiagonal() * ks;
  b.diagonal().array() += 1.0;
  Eigen::LLT<Mat> llt(b);
  if (llt.info() != Eigen::Success) {
    throw EpisodeAbort("gibbs: inner factorization failed");
  }
  GaussianConditional out;
  out.sigma = bundle.K - ks * llt.solve(ks.transpose());
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  const Vec sa = sv.cwiseProduct(bundle.a);
  out.mean = out.sigma * (y_minus_m / (2.0 * tau)) + bundle.a - ks * llt.solve(sa);
  return out;
}

Vec sample_gaussian(Rng& rng, const GaussianConditional& cond) {
  Mat s = cond.sigma;
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) {
    s.diagonal().array() += 1e-12 * std::max(1.0, s.diagonal().mean());
    llt.compute(s);
    if (llt.info() != Eigen::Success) throw EpisodeAbort("gibbs: covariance not PD");
  }
  Vec z(cond.mean.size());
  for (Index i = 0; i < z.size(); ++i) z[i] = draw_normal(rng);
  return cond.mean + Mat(llt.matrixL()) * z;
}

}  // namespace

double joint_log_density(const Mat& Y, const GibbsState& state,
                         const GramBundle& bundle, double tau) {
  const Index n = Y.rows();
  const Index c_count = Y.cols();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < c_count; ++c) {
      const double y = Y(i, c);
      const int m = state.m(i, c);
      const double w = state.omega(i, c);
      const double ft = state.f(i, c) / tau;
      const int b = m + static_cast<int>(y);
      total += -(y + m) * kLog2 + 0.5 * (y - m) * ft - 0.5 * w * ft * ft;
      if (b == 0) {
        // point mass at 0
        if (w != 0.0) return -std::numeric_limits<double>::infinity();
      } else {
        total += pg_log_density0(w, b);
      }
      total += m * std::log(state.lambda[i]) - log_gamma(m + 1.0) - state.lambda[i];
    }
  }
  for (Index c = 0; c < c_count; ++c) {
    total += log_normal_density(state.f.col(c), bundle.a, bundle.chol);
  }
  if (std::isnan(total)) throw std::logic_error("joint_log_density: NaN (invalid state)");
  return total;
}

void gibbs_step(Rng& rng, GibbsState& state, const Mat& Y,
                const GramBundle& bundle, double tau) {
  const Index n = Y.rows();
  const Index c_count = Y.cols();
  // M | lambda, F (Omega collapsed), then Omega | M, F: together one draw
  // from p(M, Omega | lambda, F, Y)
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < c_count; ++c) {
      const double rate =
          state.lambda[i] * std::exp(log_sigmoid(-state.f(i, c) / tau));
      state.m(i, c) = static_cast<int>(draw_poisson(rng, rate));
      const int b = state.m(i, c) + static_cast<int>(Y(i, c));
      state.omega(i, c) = b == 0 ? 0.0 : pg_sample(rng, b, state.f(i, c) / tau);
    }
  }
  // lambda | M
  for (Index i = 0; i < n; ++i) {
    const double shape = 1.0 + state.m.row(i).sum();
    state.lambda[i] = draw_gamma(rng, shape, static_cast<double>(c_count));
  }
  // F | Omega, M, Y
  for (Index c = 0; c < c_count; ++c) {
    const Vec ym = Y.col(c) - state.m.col(c).cast<double>();
    state.f.col(c) = sample_gaussian(rng, f_conditional(state.omega.col(c), ym, bundle, tau));
  }
}

GibbsState gibbs_init(Rng& rng, const Mat& Y, const GramBundle& bundle, double tau) {
  GibbsState s;
  const Index n = Y.rows();
  const Index c_count = Y.cols();
  s.lambda = Vec::Ones(n);
  s.m = IMat::Zero(n, c_count);
  s.f = bundle.a.replicate(1, c_count);
  s.omega.resize(n, c_count);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < c_count; ++c) {
      const int b = static_cast<int>(Y(i, c));
      s.omega(i, c) = b == 0 ? 0.0 : pg_sample(rng, b, s.f(i, c) / tau);
    }
  }
  return s;
}

Mat gibbs_posterior_mean_f(Rng& rng, const Eigen::Ref<const Mat>& X,
                           const std::vector<int>& labels, int num_classes,
                           const HyperParams& hyper, double prior_mean,
                           int burn_in, int samples) {
  if (burn_in < 0 || samples < 1) {
    throw std::invalid_argument("gibbs_posterior_mean_f: bad chain lengths");
  }
  const GramBundle bundle = make_bundle(hyper, X, prior_mean);
  const Mat Y = one_hot(labels, num_classes);
  GibbsState state = gibbs_init(rng, Y, bundle, hyper.tau);
  Mat acc = Mat::Zero(Y.rows(), Y.cols());
  for (int it = 0; it < burn_in + samples; ++it) {
    gibbs_step(rng, state, Y, bundle, hyper.tau);
    if (it >= burn_in) acc += state.f;
  }
  return acc / static_cast<double>(samples);
}

}  // namespace ccgp
