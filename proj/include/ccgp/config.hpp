#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccgp/kernels.hpp"
#include "ccgp/predict.hpp"
#include "ccgp/serialize.hpp"
#include "ccgp/task_gen.hpp"
#include "ccgp/train.hpp"

namespace ccgp {

/// Schema violations (unknown keys, wrong types, bad values) — exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct HyperInitConfig {
  int feature_dim = 8;
  bool normalize = true;
  KernelSpec kernel;
  double tau = 0.2;
  double prior_mean_train = 0.0;
  double prior_mean_test = 0.0;
  std::uint64_t init_seed = 0;
  double init_scale = 1.0;
};

struct CalibrateConfig {
  int bins = 15;
  std::vector<double> tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                                  0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
  int val_episodes = 200;
  int test_episodes = 300;
  std::uint64_t val_seed = 2;
  std::uint64_t test_seed = 3;
};

struct GibbsVsMfConfig {
  int episodes = 10;
  int burn_in = 2000;
  int samples = 20000;
  double tolerance = 0.15;
  int mf_steps = 200;
  std::uint64_t seed = 4;
};

struct RunConfig {
  TaskGeneratorConfig generator;
  HyperInitConfig hyper_init;
  TrainConfig train;
  EvalConfig eval;
  CalibrateConfig calibrate;
  GibbsVsMfConfig gibbs_vs_mf;
  std::string output_dir = "out";
  std::string hash;  // canonical hash of the validated document
};

/// Strict parse: unknown keys are rejected at every level, values are
/// range-checked, and nothing is computed before validation passes.
RunConfig parse_run_config(const Json& j);

RunConfig load_run_config(const std::string& path);

/// Fresh hyperparameters from the init section: feature-map weights drawn
/// N(0, (init_scale/sqrt(d))^2) from init_seed.
HyperParams make_initial_hyper(const RunConfig& cfg);

}  // namespace ccgp
