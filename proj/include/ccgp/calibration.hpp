#pragma once

#include <vector>

#include "ccgp/predict.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// Equal-width reliability bins on (0,1] plus ECE and MCE. Empty bins
/// contribute 0 to ECE and are excluded from MCE.
struct CalibrationReport {
  int bins = 15;
  std::vector<long> count;
  std::vector<double> mean_confidence;
  std::vector<double> mean_accuracy;
  double ece = 0.0;
  double mce = 0.0;
};

CalibrationReport calibration(const std::vector<double>& confidences,
                              const std::vector<char>& correct, int bins);

struct PooledPredictions {
  std::vector<double> confidences;
  std::vector<char> correct;
  long aborted = 0;
};

/// Pools per-query max-class confidence and correctness over `episodes`
/// episodes (deterministic per cfg.seed; reduction in episode order).
PooledPredictions collect_predictions(const HyperParams& hyper,
                                      const TaskGenerator& gen,
                                      const EvalConfig& cfg, int episodes);

/// Grid search for the temperature minimizing validation ECE (first minimum
/// wins ties). Returns the chosen tau.
double tune_tau(const HyperParams& base, const TaskGenerator& gen,
                const EvalConfig& val_cfg, int val_episodes,
                const std::vector<double>& grid, int bins);

}  // namespace ccgp
