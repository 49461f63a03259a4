#pragma once

#include <vector>

#include "ccgp/episode.hpp"
#include "ccgp/kernels.hpp"
#include "ccgp/rng.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// One augmented-sampler state: Gamma rates, Poisson counts, Polya-Gamma
/// tilts, and the per-class GP values.
struct GibbsState {
  Vec lambda;  // N
  IMat m;      // N x C
  Mat omega;   // N x C; exactly 0 where m + y = 0
  Mat f;       // N x C, column c = f^c
};

/// log of the augmented joint density. The PG(omega | m+y, 0) base term is
/// evaluated by its truncated alternating series; the function exists for
/// conditional-ratio oracles, not as a hot path.
double joint_log_density(const Mat& Y, const GibbsState& state,
                         const GramBundle& bundle, double tau);

/// One sweep of the collapsed-count Gibbs kernel: M (with Omega
/// marginalized), then Omega | M, then lambda | M, then F | Omega, M.
void gibbs_step(Rng& rng, GibbsState& state, const Mat& Y,
                const GramBundle& bundle, double tau);

GibbsState gibbs_init(Rng& rng, const Mat& Y, const GramBundle& bundle, double tau);

/// Chain average of F after burn-in.
Mat gibbs_posterior_mean_f(Rng& rng, const Eigen::Ref<const Mat>& X,
                           const std::vector<int>& labels, int num_classes,
                           const HyperParams& hyper, double prior_mean,
                           int burn_in, int samples);

}  // namespace ccgp
