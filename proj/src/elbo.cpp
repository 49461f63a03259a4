#include "ccgp/elbo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ccgp/math.hpp"
#include "ccgp/parallel.hpp"
#include "ccgp/predict.hpp"
#include "ccgp/rng.hpp"

namespace ccgp {

namespace {

constexpr double kLog2 = 0.6931471805599453;

void require_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string("elbo: non-finite term ") + term);
  }
}

}  // namespace

ElboTerms elbo_terms(const VariationalState& s, const Mat& Y,
                     const GramBundle& bundle, double tau) {
  const Index n = Y.rows();
  const Index c_count = Y.cols();
  const double log_c = std::log(static_cast<double>(c_count));
  ElboTerms t;

  for (Index c = 0; c < c_count; ++c) {
    const Mat& sigma = s.sigma[static_cast<std::size_t>(c)];
    for (Index i = 0; i < n; ++i) {
      const double y = Y(i, c);
      const double g = s.gamma(i, c);
      const double mu = s.mu(i, c);
      const double ef2 = (mu * mu + sigma(i, i)) / (tau * tau);  // E[(f/tau)^2]
      t.expected_log_lik +=
          -(y + g) * kLog2 + 0.5 * (y - g) * mu / tau - 0.5 * s.omega_bar(i, c) * ef2;
      const double ft = s.f_tilde(i, c);
      t.kl_omega += -0.5 * ft * ft * s.omega_bar(i, c) + (g + y) * log_cosh(ft / 2.0);
    }
  }
  require_finite(t.expected_log_lik, "expected_log_lik");
  require_finite(t.kl_omega, "kl_omega");

  for (Index c = 0; c < c_count; ++c) {
    const Mat& sigma = s.sigma[static_cast<std::size_t>(c)];
    Eigen::LLT<Mat> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("elbo: non-finite term kl_f (Sigma not PD)");
    }
    const double logdet_sigma =
        2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
    const Vec r = bundle.a - s.mu.col(c);
    t.kl_f += 0.5 * (bundle.chol.log_det() - logdet_sigma - static_cast<double>(n) +
                     bundle.chol.solve(sigma).trace() + r.dot(bundle.chol.solve_vec(r)));
  }
  require_finite(t.kl_f, "kl_f");

  for (Index i = 0; i < n; ++i) {
    const double a = s.alpha[i];
    const double psi_a = digamma(a);
    t.kl_lambda += -a + log_c - log_gamma(a) - (1.0 - a) * psi_a;
    for (Index c = 0; c < c_count; ++c) {
      const double g = s.gamma(i, c);
      t.kl_m += g * (std::log(g) - 1.0) - g * (psi_a - log_c) +
                a / static_cast<double>(c_count);
    }
  }
  require_finite(t.kl_lambda, "kl_lambda");
  require_finite(t.kl_m, "kl_m");
  return t;
}

double elbo(const VariationalState& state, const Mat& Y,
            const GramBundle& bundle, double tau) {
  return elbo_terms(state, Y, bundle, tau).value();
}

double ml_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg) {
  if (cfg.kind != LossKind::ml) throw std::invalid_argument("ml_loss: wrong loss kind");
  MfOptions opts;
  opts.steps = cfg.inner_steps;
  opts.early_stop = false;  // fixed step count keeps the loss deterministic in Theta
  const Mat X = combined_inputs(ep);
  const std::vector<int> y = combined_labels(ep);
  MfRun run = run_mean_field(X, y, ep.num_classes, hyper, hyper.prior_mean_train, opts);
  const Mat Y = one_hot(y, ep.num_classes);
  return -elbo(run.state, Y, run.bundle, hyper.tau);
}

double pl_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg) {
  if (cfg.kind != LossKind::pl) throw std::invalid_argument("pl_loss: wrong loss kind");
  if (cfg.mc_samples < 1) throw std::invalid_argument("pl_loss: mc_samples >= 1");
  MfOptions opts;
  opts.steps = cfg.inner_steps;
  opts.early_stop = false;
  MfRun run = run_mean_field(ep.support_X, ep.support_y, ep.num_classes, hyper,
                             hyper.prior_mean_train, opts);
  const PredictiveMoments pm =
      predictive_moments(run.state, run.bundle, hyper, ep.support_X, ep.query_X);
  const Index q_count = ep.query_X.rows();
  const Index c_count = pm.mu.cols();

  // Common random numbers: the standard normals depend only on the seed, so
  // perturbed hyperparameters see the same draws.
  Rng rng = make_rng(cfg.rng_seed);
  double total = 0.0;
  Vec f(c_count);
  for (Index q = 0; q < q_count; ++q) {
    double p_hat = 0.0;
    for (int m = 0; m < cfg.mc_samples; ++m) {
      for (Index c = 0; c < c_count; ++c) {
        f[c] = pm.mu(q, c) + std::sqrt(pm.var(q, c)) * draw_normal(rng);
      }
      p_hat += logistic_softmax(f, hyper.tau)[ep.query_y[static_cast<std::size_t>(q)]];
    }
    total += std::log(p_hat / cfg.mc_samples);
  }
  return -total / static_cast<double>(q_count);
}

double episode_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg) {
  return cfg.kind == LossKind::ml ? ml_loss(ep, hyper, cfg) : pl_loss(ep, hyper, cfg);
}

GradReport fd_grad(const std::function<double(const HyperParams&)>& loss,
                   const HyperParams& hyper, const LossConfig& cfg, int workers) {
  const Vec theta0 = theta_pack(hyper);
  if (!theta0.allFinite()) throw std::invalid_argument("fd_grad: non-finite parameters");
  GradReport report;
  report.loss_value = loss(hyper);
  report.fd_step = cfg.fd_step;
  report.grad.resize(theta0.size());
  parallel_for(theta0.size(), workers, [&](long i) {
    const double h = cfg.fd_step * std::max(1.0, std::abs(theta0[i]));
    Vec tp = theta0;
    tp[i] += h;
    const double up = loss(theta_unpack(hyper, tp));
    tp[i] = theta0[i] - h;
    const double down = loss(theta_unpack(hyper, tp));
    const double g = (up - down) / (2.0 * h);
    if (!std::isfinite(g)) {
      throw std::runtime_error("fd_grad: non-finite difference quotient at coordinate " +
                               std::to_string(i));
    }
    report.grad[i] = g;
  });
  return report;
}

}  // namespace ccgp
