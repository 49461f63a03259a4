#include "ccgp/predict.hpp"

#include <cmath>
#include <numeric>

#include "ccgp/math.hpp"
#include "ccgp/parallel.hpp"

namespace ccgp {

PredictiveMoments predictive_moments(const VariationalState& state,
                                     const GramBundle& support_bundle,
                                     const HyperParams& hyper,
                                     const Eigen::Ref<const Mat>& support_X,
                                     const Eigen::Ref<const Mat>& query_X) {
  const Mat zs = map_features(hyper.feature_map, support_X);
  const Mat zq = map_features(hyper.feature_map, query_X);
  const Mat k_star = gram(hyper.kernel, zq, zs);  // Q x L
  const Vec k_diag = gram_diag(hyper.kernel, zq);
  const Mat v = support_bundle.chol.solve(k_star.transpose());  // L x Q = K^{-1} k_*'
  const Index q_count = query_X.rows();
  const Index c_count = state.mu.cols();

  PredictiveMoments pm;
  pm.mu.resize(q_count, c_count);
  pm.var.resize(q_count, c_count);
  const Vec common =
      (k_star.transpose().cwiseProduct(v)).colwise().sum().transpose();  // k_* K^{-1} k_*'
  for (Index c = 0; c < c_count; ++c) {
    // operate on the centered posterior mean so the constant prior mean
    // contributes a_* + k_* K^{-1} (mu - a)
    pm.mu.col(c) = v.transpose() * (state.mu.col(c) - support_bundle.a);
    pm.mu.col(c).array() += support_bundle.a.size() > 0 ? support_bundle.a[0] : 0.0;
    const Mat sv = state.sigma[static_cast<std::size_t>(c)] * v;  // L x Q
    pm.var.col(c) = k_diag - common + (v.cwiseProduct(sv)).colwise().sum().transpose();
  }
  pm.var = pm.var.cwiseMax(1e-10);
  return pm;
}

Mat predict_proba(const PredictiveMoments& moments, double tau, int mc, Rng& rng) {
  if (mc < 1) throw std::invalid_argument("predict_proba: mc >= 1");
  const Index q_count = moments.mu.rows();
  const Index c_count = moments.mu.cols();
  Mat probs = Mat::Zero(q_count, c_count);
  Vec f(c_count);
  for (Index q = 0; q < q_count; ++q) {
    for (int m = 0; m < mc; ++m) {
      for (Index c = 0; c < c_count; ++c) {
        f[c] = moments.mu(q, c) + std::sqrt(moments.var(q, c)) * draw_normal(rng);
      }
      probs.row(q) += logistic_softmax(f, tau).transpose();
    }
    probs.row(q) /= probs.row(q).sum();
  }
  return probs;
}

EpisodeEval evaluate_episode(const Episode& ep, const HyperParams& hyper,
                             const EvalConfig& cfg, Rng& rng) {
  EpisodeEval out;
  MfOptions opts;
  opts.steps = cfg.inner_steps;
  opts.early_stop = true;  // test time
  MfRun run;
  try {
    run = run_mean_field(ep.support_X, ep.support_y, ep.num_classes, hyper,
                         hyper.prior_mean_test, opts);
  } catch (const EpisodeAbort&) {
    out.aborted = true;
    return out;
  }
  const PredictiveMoments pm =
      predictive_moments(run.state, run.bundle, hyper, ep.support_X, ep.query_X);
  const double score_tau = cfg.score_tau > 0.0 ? cfg.score_tau : hyper.tau;
  const Mat probs = predict_proba(pm, score_tau, cfg.mc_samples, rng);
  long hits = 0;
  for (Index q = 0; q < probs.rows(); ++q) {
    Index best;
    const double conf = probs.row(q).maxCoeff(&best);
    const bool ok = static_cast<int>(best) == ep.query_y[static_cast<std::size_t>(q)];
    hits += ok ? 1 : 0;
    out.confidences.push_back(conf);
    out.correct.push_back(ok ? 1 : 0);
  }
  out.accuracy = static_cast<double>(hits) / static_cast<double>(probs.rows());
  return out;
}

EvalResult evaluate(const HyperParams& hyper, const TaskGenerator& gen,
                    const EvalConfig& cfg) {
  if (cfg.batches < 1 || cfg.episodes_per_batch < 1) {
    throw std::invalid_argument("evaluate: batches and episodes_per_batch >= 1");
  }
  const long total = static_cast<long>(cfg.batches) * cfg.episodes_per_batch;
  std::vector<EpisodeEval> evals(static_cast<std::size_t>(total));
  parallel_for(total, cfg.workers, [&](long i) {
    Rng ep_rng = derive_rng(cfg.seed, 0xe7a1ULL, static_cast<std::uint64_t>(i));
    const Episode ep = sample_episode(gen, ep_rng);
    evals[static_cast<std::size_t>(i)] = evaluate_episode(ep, hyper, cfg, ep_rng);
  });

  EvalResult res;
  for (int b = 0; b < cfg.batches; ++b) {
    double acc = 0.0;
    long counted = 0;
    for (int e = 0; e < cfg.episodes_per_batch; ++e) {
      const auto& ev = evals[static_cast<std::size_t>(b) * cfg.episodes_per_batch + e];
      if (ev.aborted) {
        ++res.aborted;
        continue;
      }
      acc += ev.accuracy;
      ++counted;
      res.episode_accuracy.push_back(ev.accuracy);
    }
    res.batch_accuracy.push_back(counted > 0 ? acc / static_cast<double>(counted) : 0.0);
  }
  const double mean = std::accumulate(res.batch_accuracy.begin(),
                                      res.batch_accuracy.end(), 0.0) /
                      static_cast<double>(cfg.batches);
  double var = 0.0;
  for (double a : res.batch_accuracy) var += (a - mean) * (a - mean);
  res.mean_accuracy = mean;
  res.std_accuracy = cfg.batches > 1 ? std::sqrt(var / (cfg.batches - 1)) : 0.0;
  return res;
}

}  // namespace ccgp
