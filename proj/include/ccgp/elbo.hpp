#pragma once

#include <cstdint>
#include <functional>

#include "ccgp/episode.hpp"
#include "ccgp/kernels.hpp"
#include "ccgp/mean_field.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// The five analytical pieces of the bound. value() is their signed sum;
/// each piece is exposed so tests can check the decomposition.
struct ElboTerms {
  double expected_log_lik = 0.0;  // E_q[log p(Y | ...)]
  double kl_f = 0.0;              // KL(q(F) || p(F))
  double kl_lambda = 0.0;         // KL(q(lambda) || p(lambda))
  double kl_m = 0.0;              // E KL(q(M) || p(M | lambda))
  double kl_omega = 0.0;          // E KL(q(Omega|M) || p(Omega|M))

  double value() const {
    return expected_log_lik - kl_f - kl_lambda - kl_m - kl_omega;
  }
};

/// Analytical ELBO of the state's variational factors. The quadratic
/// likelihood term uses E[f^2] from the current mu/Sigma, which equals the
/// stored tilt whenever the state is freshly swept; this keeps the value a
/// true lower bound at every point of the sweep sequence. Throws on a
/// non-finite term, naming it.
ElboTerms elbo_terms(const VariationalState& state, const Mat& Y,
                     const GramBundle& bundle, double tau);

double elbo(const VariationalState& state, const Mat& Y,
            const GramBundle& bundle, double tau);

enum class LossKind { ml, pl };

struct LossConfig {
  LossKind kind = LossKind::ml;
  int inner_steps = 2;
  int mc_samples = 16;        // PL only
  double fd_step = 1e-4;
  std::uint64_t rng_seed = 0; // PL common random numbers
};

/// Negative ELBO after `inner_steps` fixed sweeps on support+query.
double ml_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg);

/// Negative mean Monte-Carlo predictive log-likelihood on the query set,
/// posterior fit on support only; seeded from cfg.rng_seed so repeated
/// evaluations share common random numbers.
double pl_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg);

double episode_loss(const Episode& ep, const HyperParams& hyper, const LossConfig& cfg);

struct GradReport {
  Vec grad;
  double loss_value = 0.0;
  double fd_step = 0.0;
};

/// Central finite differences over the flattened learnable parameters, step
/// h*max(1,|theta_i|) per coordinate. Every perturbed evaluation re-runs the
/// full inner loop. Coordinates may be evaluated concurrently.
GradReport fd_grad(const std::function<double(const HyperParams&)>& loss,
                   const HyperParams& hyper, const LossConfig& cfg,
                   int workers = 1);

}  // namespace ccgp
