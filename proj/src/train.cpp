#include "ccgp/train.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ccgp/log.hpp"
#include "ccgp/parallel.hpp"
#include "ccgp/serialize.hpp"
#include "ccgp/version.hpp"

namespace ccgp {

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  Json j;
  j["format_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["epoch"] = ckpt.epoch;
  j["theta"] = vec_to_json(ckpt.theta);
  j["adam"] = adam_to_json(ckpt.adam);
  j["hyper"] = hyper_to_json(ckpt.hyper);
  j["config_hash"] = ckpt.config_hash;
  write_text_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const Json j = Json::parse(read_text_file(path));
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }
  Checkpoint c;
  c.epoch = j.at("epoch").get<int>();
  c.theta = vec_from_json(j.at("theta"));
  c.adam = adam_from_json(j.at("adam"));
  c.hyper = hyper_from_json(j.at("hyper"));
  c.config_hash = j.at("config_hash").get<std::string>();
  return c;
}

namespace {

Vec learning_rates(const HyperParams& hyper, const TrainConfig& cfg) {
  const std::vector<bool> fm = theta_feature_mask(hyper);
  Vec lr(static_cast<Index>(fm.size()));
  for (std::size_t i = 0; i < fm.size(); ++i) {
    lr[static_cast<Index>(i)] = fm[i] ? cfg.lr_feature_map : cfg.lr_kernel;
  }
  return lr;
}

struct StepResult {
  bool aborted = false;
  double loss = 0.0;
  Vec grad;
};

StepResult episode_grad(const Episode& ep, const HyperParams& hyper,
                        const TrainConfig& cfg, std::uint64_t episode_key,
                        int fd_workers) {
  StepResult out;
  LossConfig loss_cfg = cfg.loss;
  // per-episode stream for the PL estimator; perturbed evaluations inside
  // fd_grad still share it (common random numbers)
  loss_cfg.rng_seed = cfg.loss.rng_seed ^ episode_key;
  try {
    const GradReport rep = fd_grad(
        [&](const HyperParams& h) { return episode_loss(ep, h, loss_cfg); }, hyper,
        loss_cfg, fd_workers);
    out.loss = rep.loss_value;
    out.grad = rep.grad;
  } catch (const EpisodeAbort& e) {
    log::debug("episode aborted: %s", e.what());
    out.aborted = true;
  }
  return out;
}

}  // namespace

TrainLog train(const TaskGenerator& gen, const HyperParams& init,
               const TrainConfig& cfg, const std::string& config_hash_str,
               const std::optional<Checkpoint>& resume) {
  if (cfg.epochs < 1 || cfg.episodes_per_epoch < 1 || cfg.meta_batch < 1) {
    throw std::invalid_argument("train: epochs, episodes_per_epoch, meta_batch >= 1");
  }
  if (!(cfg.lr_feature_map > 0.0) || !(cfg.lr_kernel > 0.0)) {
    throw std::invalid_argument("train: learning rates must be > 0");
  }
  if (cfg.episodes_per_epoch % cfg.meta_batch != 0) {
    throw std::invalid_argument("train: meta_batch must divide episodes_per_epoch");
  }

  HyperParams hyper = init;
  Vec theta = theta_pack(hyper);
  AdamState adam = make_adam_state(theta.size());
  int start_epoch = 0;
  if (resume.has_value()) {
    theta = resume->theta;
    adam = resume->adam;
    start_epoch = resume->epoch;
    hyper = theta_unpack(init, theta);
  }
  const Vec lr = learning_rates(hyper, cfg);

  TrainLog log_out;
  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    double grad_norm_sum = 0.0;
    long counted = 0;
    long aborted = 0;

    const int steps = cfg.episodes_per_epoch / cfg.meta_batch;
    for (int step = 0; step < steps; ++step) {
      std::vector<StepResult> batch(static_cast<std::size_t>(cfg.meta_batch));
      const HyperParams at = theta_unpack(init, theta);
      // within a batch, episodes run at the same Theta and may be parallel;
      // with meta_batch 1, the workers go to the FD coordinates instead
      const int ep_workers = cfg.meta_batch > 1 ? cfg.workers : 1;
      const int fd_workers = cfg.meta_batch > 1 ? 1 : cfg.workers;
      parallel_for(cfg.meta_batch, ep_workers, [&](long b) {
        const long idx = static_cast<long>(step) * cfg.meta_batch + b;
        Rng ep_rng = derive_rng(cfg.seed, 0x7261696eULL,
                                static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(idx));
        const Episode ep = sample_episode(gen, ep_rng);
        std::uint64_t key_state =
            cfg.seed ^ (static_cast<std::uint64_t>(epoch) << 20) ^
            static_cast<std::uint64_t>(idx);
        batch[static_cast<std::size_t>(b)] =
            episode_grad(ep, at, cfg, splitmix64(key_state), fd_workers);
      });

      Vec grad = Vec::Zero(theta.size());
      long used = 0;
      for (const auto& r : batch) {  // fixed reduction order
        if (r.aborted) {
          ++aborted;
          continue;
        }
        grad += r.grad;
        loss_sum += r.loss;
        grad_norm_sum += r.grad.norm();
        ++used;
      }
      if (used == 0) continue;
      grad /= static_cast<double>(used);
      counted += used;
      adam_step(adam, theta, grad, lr);
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.mean_loss = counted > 0 ? loss_sum / static_cast<double>(counted) : 0.0;
    rec.mean_grad_norm = counted > 0 ? grad_norm_sum / static_cast<double>(counted) : 0.0;
    rec.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();
    rec.aborted = aborted;
    log_out.epochs.push_back(rec);
    log_out.aborted_total += aborted;
    log::info("epoch %d/%d  loss %.6f  |grad| %.4g  aborts %ld", rec.epoch, cfg.epochs,
              rec.mean_loss, rec.mean_grad_norm, aborted);

    if (!cfg.checkpoint_path.empty()) {
      Checkpoint ckpt;
      ckpt.epoch = epoch + 1;
      ckpt.theta = theta;
      ckpt.adam = adam;
      ckpt.hyper = theta_unpack(init, theta);
      ckpt.config_hash = config_hash_str;
      save_checkpoint(ckpt, cfg.checkpoint_path);
    }
  }

  const long total_episodes =
      static_cast<long>(cfg.epochs - start_epoch) * cfg.episodes_per_epoch;
  if (total_episodes > 0 &&
      static_cast<double>(log_out.aborted_total) >
          cfg.max_abort_rate * static_cast<double>(total_episodes)) {
    throw std::runtime_error("train: abort rate above threshold");
  }
  log_out.final_hyper = theta_unpack(init, theta);
  return log_out;
}

}  // namespace ccgp
