#include <string>

#include "CLI11.hpp"

#include "ccgp/cli.hpp"
#include "ccgp/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Conditionally-conjugate GP classification with the tempered "
               "logistic-softmax likelihood"};
  app.set_version_flag("--version", std::string(ccgp::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path;
  ccgp::CliOptions opts;
  double tau = 1.0;

  int workers = 0;
  std::uint64_t seed = 0;
  double tau_override = 0.0;
  int bins = 0;
  std::string out;
  double tolerance = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--workers", workers, "episode/gradient worker threads");
    cmd->add_option("--seed", seed, "seed override");
    cmd->add_option("--out", out, "output directory or file override");
  };

  auto* train = app.add_subcommand("train", "meta-train hyperparameters");
  train->add_option("--config", config_path, "run config JSON")->required();
  add_common(train);

  auto* eval = app.add_subcommand("eval", "episodic accuracy evaluation");
  eval->add_option("--config", config_path, "run config JSON")->required();
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
  eval->add_option("--tau", tau_override, "temperature override");
  add_common(eval);

  auto* calibrate = app.add_subcommand("calibrate", "temperature tuning + ECE/MCE");
  calibrate->add_option("--config", config_path, "run config JSON")->required();
  calibrate->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
  calibrate->add_option("--bins", bins, "calibration bin count");
  add_common(calibrate);

  auto* surface = app.add_subcommand("surface", "likelihood surface CSV (f3 = -100)");
  surface->add_option("--tau", tau, "temperature")->required();
  surface->add_option("--shift", opts.shift, "constant added to all logits");
  surface->add_option("--grid", opts.grid, "points per axis");
  surface->add_option("--fmin", opts.fmin, "grid lower bound");
  surface->add_option("--fmax", opts.fmax, "grid upper bound");
  surface->add_option("--out", out, "output CSV path");

  auto* selftest = app.add_subcommand("selftest", "fast verification groups");
  (void)selftest;

  auto* gvm = app.add_subcommand("gibbs-vs-mf", "cross-check the two backends");
  gvm->add_option("--config", config_path, "run config JSON")->required();
  gvm->add_option("--tolerance", tolerance, "max |d posterior mean| allowed");
  add_common(gvm);

  CLI11_PARSE(app, argc, argv);

  if (workers > 0) opts.workers = workers;
  for (auto* cmd : {train, eval, calibrate, gvm}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) opts.seed = seed;
  }
  if (eval->parsed() && eval->count("--tau") > 0) opts.tau = tau_override;
  if (calibrate->parsed() && calibrate->count("--bins") > 0) opts.bins = bins;
  if (!out.empty()) opts.out = out;
  if (gvm->parsed() && gvm->count("--tolerance") > 0) opts.tolerance = tolerance;

  if (train->parsed()) return ccgp::cmd_train(config_path, opts);
  if (eval->parsed()) return ccgp::cmd_eval(config_path, checkpoint_path, opts);
  if (calibrate->parsed()) return ccgp::cmd_calibrate(config_path, checkpoint_path, opts);
  if (surface->parsed()) return ccgp::cmd_surface(tau, opts);
  if (selftest->parsed()) return ccgp::cmd_selftest();
  if (gvm->parsed()) return ccgp::cmd_gibbs_vs_mf(config_path, opts);
  return 2;
}
