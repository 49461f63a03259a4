#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccgp/adam.hpp"
#include "ccgp/elbo.hpp"
#include "ccgp/kernels.hpp"
#include "ccgp/task_gen.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

struct TrainConfig {
  int epochs = 30;
  int episodes_per_epoch = 100;
  LossConfig loss;
  double lr_feature_map = 1e-3;
  double lr_kernel = 1e-4;
  std::uint64_t seed = 0;
  int meta_batch = 1;  // episodes averaged per optimizer step
  std::string checkpoint_path;
  int workers = 1;
  double max_abort_rate = 0.05;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_grad_norm = 0.0;
  double wall_time_sec = 0.0;  // reported in the CSV only, not the log JSON
  long aborted = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  HyperParams final_hyper;
  long aborted_total = 0;
};

struct Checkpoint {
  int epoch = 0;
  Vec theta;
  AdamState adam;
  HyperParams hyper;  // prototype carrying fixed settings and shapes
  std::string config_hash;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Algorithm: per episode, inner mean-field fit inside the configured loss,
/// finite-difference outer gradient, Adam step (feature-map and kernel
/// coordinates use separate learning rates). Episode streams derive from
/// (seed, epoch, index), so a resumed run retraces an uninterrupted one.
/// Episodes whose kernel cannot be factorized are skipped and counted; the
/// run fails if more than max_abort_rate of them abort.
TrainLog train(const TaskGenerator& gen, const HyperParams& init,
               const TrainConfig& cfg, const std::string& config_hash = "",
               const std::optional<Checkpoint>& resume = std::nullopt);

}  // namespace ccgp
