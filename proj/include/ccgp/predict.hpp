#pragma once

#include <cstdint>
#include <vector>

#include "ccgp/kernels.hpp"
#include "ccgp/mean_field.hpp"
#include "ccgp/rng.hpp"
#include "ccgp/task_gen.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// Per-query, per-class Gaussian predictive marginals. Variances floored at
/// 1e-10.
struct PredictiveMoments {
  Mat mu;   // Q x C
  Mat var;  // Q x C
};

/// GP predictive marginals at the query points from a support-set posterior:
///   mu_*    = a_* + k_* K^{-1} (mu - a),
///   sigma^2 = k_** - k_* K^{-1} k_*' + k_* K^{-1} Sigma K^{-1} k_*',
/// all solves against the bundle's factor. The prior mean is the test-time
/// policy value carried by the bundle.
PredictiveMoments predictive_moments(const VariationalState& state,
                                     const GramBundle& support_bundle,
                                     const HyperParams& hyper,
                                     const Eigen::Ref<const Mat>& support_X,
                                     const Eigen::Ref<const Mat>& query_X);

/// Monte-Carlo class probabilities: per query, average the tempered
/// logistic-softmax over mc independent per-class normal draws; rows
/// renormalized.
Mat predict_proba(const PredictiveMoments& moments, double tau, int mc, Rng& rng);

struct EvalConfig {
  int batches = 5;
  int episodes_per_batch = 600;
  int inner_steps = 20;
  int mc_samples = 256;
  std::uint64_t seed = 0;
  int workers = 1;
  double score_tau = 0.0;  // >0: likelihood temperature for scoring only,
                           // leaving task inference at the model's tau
                           // (calibration alignment)
};

struct EpisodeEval {
  double accuracy = 0.0;
  bool aborted = false;
  std::vector<double> confidences;  // max-class probability per query
  std::vector<char> correct;
};

struct EvalResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;           // sample std over batches
  std::vector<double> batch_accuracy;
  std::vector<double> episode_accuracy;
  long aborted = 0;
};

/// Test-time inference (early-stopped mean field on the support with the
/// test prior mean) and argmax classification of each query.
EpisodeEval evaluate_episode(const Episode& ep, const HyperParams& hyper,
                             const EvalConfig& cfg, Rng& rng);

/// Episodic evaluation with per-episode streams derived from (seed, index);
/// the reduction is in episode order, so results do not depend on workers.
EvalResult evaluate(const HyperParams& hyper, const TaskGenerator& gen,
                    const EvalConfig& cfg);

}  // namespace ccgp
