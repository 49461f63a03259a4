#include "ccgp/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "ccgp/parallel.hpp"

namespace ccgp {

CalibrationReport calibration(const std::vector<double>& confidences,
                              const std::vector<char>& correct, int bins) {
  if (confidences.size() != correct.size()) {
    throw std::invalid_argument("calibration: length mismatch");
  }
  if (confidences.empty()) throw std::invalid_argument("calibration: empty input");
  if (bins < 1) throw std::invalid_argument("calibration: bins >= 1");

  CalibrationReport rep;
  rep.bins = bins;
  rep.count.assign(static_cast<std::size_t>(bins), 0);
  rep.mean_confidence.assign(static_cast<std::size_t>(bins), 0.0);
  rep.mean_accuracy.assign(static_cast<std::size_t>(bins), 0.0);

  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw std::invalid_argument("calibration: confidence outside [0,1]");
    }
    // bins on (0,1]: bin b covers (b/B, (b+1)/B]
    int b = static_cast<int>(std::ceil(c * bins)) - 1;
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;
    rep.count[static_cast<std::size_t>(b)] += 1;
    rep.mean_confidence[static_cast<std::size_t>(b)] += c;
    rep.mean_accuracy[static_cast<std::size_t>(b)] += correct[i] ? 1.0 : 0.0;
  }

  const double total = static_cast<double>(confidences.size());
  for (int b = 0; b < bins; ++b) {
    const auto ib = static_cast<std::size_t>(b);
    if (rep.count[ib] == 0) continue;
    rep.mean_confidence[ib] /= static_cast<double>(rep.count[ib]);
    rep.mean_accuracy[ib] /= static_cast<double>(rep.count[ib]);
    const double gap = std::abs(rep.mean_confidence[ib] - rep.mean_accuracy[ib]);
    rep.ece += static_cast<double>(rep.count[ib]) / total * gap;
    rep.mce = std::max(rep.mce, gap);
  }
  return rep;
}

PooledPredictions collect_predictions(const HyperParams& hyper,
                                      const TaskGenerator& gen,
                                      const EvalConfig& cfg, int episodes) {
  if (episodes < 1) throw std::invalid_argument("collect_predictions: episodes >= 1");
  std::vector<EpisodeEval> evals(static_cast<std::size_t>(episodes));
  parallel_for(episodes, cfg.workers, [&](long i) {
    Rng ep_rng = derive_rng(cfg.seed, 0xca11ULL, static_cast<std::uint64_t>(i));
    const Episode ep = sample_episode(gen, ep_rng);
    evals[static_cast<std::size_t>(i)] = evaluate_episode(ep, hyper, cfg, ep_rng);
  });
  PooledPredictions pooled;
  for (const auto& ev : evals) {
    if (ev.aborted) {
      ++pooled.aborted;
      continue;
    }
    pooled.confidences.insert(pooled.confidences.end(), ev.confidences.begin(),
                              ev.confidences.end());
    pooled.correct.insert(pooled.correct.end(), ev.correct.begin(), ev.correct.end());
  }
  return pooled;
}

double tune_tau(const HyperParams& base, const TaskGenerator& gen,
                const EvalConfig& val_cfg, int val_episodes,
                const std::vector<double>& grid, int bins) {
  if (grid.empty()) throw std::invalid_argument("tune_tau: empty grid");
  // alignment only: task inference stays at the model's tau, the grid value
  // rescales the scoring likelihood
  double best_tau = grid.front();
  double best_ece = std::numeric_limits<double>::infinity();
  for (double tau : grid) {
    EvalConfig cfg = val_cfg;
    cfg.score_tau = tau;
    const PooledPredictions p = collect_predictions(base, gen, cfg, val_episodes);
    if (p.confidences.empty()) continue;
    const double ece = calibration(p.confidences, p.correct, bins).ece;
    if (ece < best_ece) {
      best_ece = ece;
      best_tau = tau;
    }
  }
  return best_tau;
}

}  // namespace ccgp
