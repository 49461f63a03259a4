#pragma once

#include <vector>

#include "ccgp/episode.hpp"
#include "ccgp/kernels.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// Mean-field factors for one task:
///   q1(Omega|M) q1(M) over the augmented counts/tilts and
///   q2(lambda) q2(F) over the rate and the per-class GP values.
struct VariationalState {
  Mat gamma;               // N x C   Poisson rates
  Vec alpha;               // N       Gamma shapes (rate is C)
  Mat mu;                  // N x C   column c = posterior mean of f^c
  std::vector<Mat> sigma;  // C of N x N posterior covariances
  Mat omega_bar;           // N x C   E[omega]
  Mat f_tilde;             // N x C   tilt sqrt(E[f^2])/tau
};

/// mu <- a, Sigma <- K, alpha <- C, then one application of the tilt, rate,
/// and omega-moment updates in that order.
VariationalState init_state(const Mat& Y, const GramBundle& bundle, double tau);

/// One full coordinate sweep in the fixed order
/// f_tilde -> gamma -> alpha -> omega_bar -> Sigma -> mu.
void mf_sweep(VariationalState& state, const Mat& Y, const GramBundle& bundle,
              double tau);

/// The q2(F) block of the sweep alone (Sigma then mu, all classes), reading
/// the state's current omega_bar/gamma. mf_sweep ends with this; exposed so
/// oracles can drive it against the direct-inverse formula.
void mf_update_gaussian_block(VariationalState& state, const Mat& Y,
                              const GramBundle& bundle, double tau);

struct MfOptions {
  int steps = 2;
  bool early_stop = false;   // test time: stop when max |d mu| < tol
  double tol = 1e-6;
};

struct MfRun {
  VariationalState state;
  GramBundle bundle;
  int sweeps = 0;
  double last_delta = 0.0;   // max |d mu| of the final sweep
};

/// Builds the Gram bundle on X and runs init + sweeps. Deterministic.
MfRun run_mean_field(const Eigen::Ref<const Mat>& X,
                     const std::vector<int>& labels, int num_classes,
                     const HyperParams& hyper, double prior_mean,
                     const MfOptions& opts);

}  // namespace ccgp
