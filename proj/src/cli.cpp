#include "ccgp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ccgp/calibration.hpp"
#include "ccgp/config.hpp"
#include "ccgp/elbo.hpp"
#include "ccgp/gibbs.hpp"
#include "ccgp/log.hpp"
#include "ccgp/math.hpp"
#include "ccgp/polya_gamma.hpp"
#include "ccgp/quadrature.hpp"
#include "ccgp/serialize.hpp"
#include "ccgp/train.hpp"
#include "ccgp/version.hpp"

namespace ccgp {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

Json meta_header(const RunConfig& cfg, std::uint64_t seed) {
  return Json{{"tool_version", kToolVersion}, {"config_hash", cfg.hash}, {"seed", seed}};
}

void write_run_meta(const std::string& dir, const std::string& command,
                    const RunConfig& cfg, std::uint64_t seed, double wall_sec) {
  Json j = meta_header(cfg, seed);
  j["command"] = command;
  j["wall_time_sec"] = wall_sec;
  write_text_file(dir + "/" + command + "_meta.json", j.dump(2) + "\n");
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename Fn>
int guarded(const char* command, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log::error("%s: %s", command, e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error("%s: %s", command, e.what());
    return 1;
  }
}

Checkpoint load_checked_checkpoint(const std::string& path, const RunConfig& cfg) {
  if (!fs::exists(path)) throw ConfigError("checkpoint not found: " + path);
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.config_hash != cfg.hash) {
    throw ConfigError("checkpoint/config hash mismatch: checkpoint was trained with " +
                      ckpt.config_hash + ", config hashes to " + cfg.hash);
  }
  return ckpt;
}

}  // namespace

int cmd_train(const std::string& config_path, const CliOptions& opts) {
  return guarded("train", [&] {
    const auto t0 = Clock::now();
    RunConfig cfg = load_run_config(config_path);
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.workers) cfg.train.workers = *opts.workers;
    if (opts.seed) cfg.train.seed = *opts.seed;
    fs::create_directories(cfg.output_dir);
    if (cfg.train.checkpoint_path.empty()) {
      cfg.train.checkpoint_path = cfg.output_dir + "/checkpoint.json";
    }

    const TaskGenerator gen = make_generator(cfg.generator);
    const HyperParams init = make_initial_hyper(cfg);
    const TrainLog tl = train(gen, init, cfg.train, cfg.hash);

    Json j = meta_header(cfg, cfg.train.seed);
    Json epochs = Json::array();
    for (const auto& e : tl.epochs) {
      epochs.push_back({{"epoch", e.epoch},
                        {"mean_loss", e.mean_loss},
                        {"mean_grad_norm", e.mean_grad_norm},
                        {"aborted", e.aborted}});
    }
    j["epochs"] = epochs;
    j["aborted_total"] = tl.aborted_total;
    j["final_theta"] = vec_to_json(theta_pack(tl.final_hyper));
    write_text_file(cfg.output_dir + "/train_log.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "epoch,mean_loss,mean_grad_norm,wall_time_sec,aborted\n";
    for (const auto& e : tl.epochs) {
      csv << e.epoch << ',' << csv_num(e.mean_loss) << ',' << csv_num(e.mean_grad_norm)
          << ',' << csv_num(e.wall_time_sec) << ',' << e.aborted << '\n';
    }
    write_text_file(cfg.output_dir + "/epochs.csv", csv.str());

    write_run_meta(cfg.output_dir, "train", cfg, cfg.train.seed,
                   std::chrono::duration<double>(Clock::now() - t0).count());
    return 0;
  });
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const CliOptions& opts) {
  return guarded("eval", [&] {
    const auto t0 = Clock::now();
    RunConfig cfg = load_run_config(config_path);
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.workers) cfg.eval.workers = *opts.workers;
    if (opts.seed) cfg.eval.seed = *opts.seed;
    const Checkpoint ckpt = load_checked_checkpoint(checkpoint_path, cfg);
    fs::create_directories(cfg.output_dir);

    HyperParams hyper = ckpt.hyper;
    if (opts.tau) hyper.tau = *opts.tau;

    const TaskGenerator gen = make_generator(cfg.generator);
    const EvalResult res = evaluate(hyper, gen, cfg.eval);

    Json j = meta_header(cfg, cfg.eval.seed);
    j["tau"] = hyper.tau;
    j["batches"] = cfg.eval.batches;
    j["episodes_per_batch"] = cfg.eval.episodes_per_batch;
    j["mean_accuracy"] = res.mean_accuracy;
    j["std_accuracy"] = res.std_accuracy;
    j["batch_accuracy"] = res.batch_accuracy;
    j["aborted"] = res.aborted;
    write_text_file(cfg.output_dir + "/accuracy.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "episode,accuracy\n";
    for (std::size_t i = 0; i < res.episode_accuracy.size(); ++i) {
      csv << i << ',' << csv_num(res.episode_accuracy[i]) << '\n';
    }
    write_text_file(cfg.output_dir + "/episodes.csv", csv.str());

    write_run_meta(cfg.output_dir, "eval", cfg, cfg.eval.seed,
                   std::chrono::duration<double>(Clock::now() - t0).count());
    log::info("eval: accuracy %.4f +/- %.4f", res.mean_accuracy, res.std_accuracy);
    return 0;
  });
}

int cmd_calibrate(const std::string& config_path, const std::string& checkpoint_path,
                  const CliOptions& opts) {
  return guarded("calibrate", [&] {
    const auto t0 = Clock::now();
    RunConfig cfg = load_run_config(config_path);
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.workers) cfg.eval.workers = *opts.workers;
    if (opts.bins) cfg.calibrate.bins = *opts.bins;
    const Checkpoint ckpt = load_checked_checkpoint(checkpoint_path, cfg);
    fs::create_directories(cfg.output_dir);

    const TaskGenerator gen = make_generator(cfg.generator);
    EvalConfig val_cfg = cfg.eval;
    val_cfg.seed = cfg.calibrate.val_seed;
    const double tau_star = tune_tau(ckpt.hyper, gen, val_cfg, cfg.calibrate.val_episodes,
                                     cfg.calibrate.tau_grid, cfg.calibrate.bins);

    EvalConfig test_cfg = cfg.eval;
    test_cfg.seed = cfg.calibrate.test_seed;
    test_cfg.score_tau = tau_star;
    const PooledPredictions pooled =
        collect_predictions(ckpt.hyper, gen, test_cfg, cfg.calibrate.test_episodes);
    if (pooled.confidences.empty()) throw std::runtime_error("calibrate: no predictions");
    const CalibrationReport rep =
        calibration(pooled.confidences, pooled.correct, cfg.calibrate.bins);

    Json j = meta_header(cfg, cfg.calibrate.test_seed);
    j["tau_selected"] = tau_star;
    j["bins"] = rep.bins;
    j["ece"] = rep.ece;
    j["mce"] = rep.mce;
    j["test_episodes"] = cfg.calibrate.test_episodes;
    j["aborted"] = pooled.aborted;
    write_text_file(cfg.output_dir + "/calibration.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "bin_center,mean_confidence,mean_accuracy,count\n";
    for (int b = 0; b < rep.bins; ++b) {
      const double center = (b + 0.5) / rep.bins;
      csv << csv_num(center) << ',' << csv_num(rep.mean_confidence[b]) << ','
          << csv_num(rep.mean_accuracy[b]) << ',' << rep.count[b] << '\n';
    }
    write_text_file(cfg.output_dir + "/reliability.csv", csv.str());

    write_run_meta(cfg.output_dir, "calibrate", cfg, cfg.calibrate.test_seed,
                   std::chrono::duration<double>(Clock::now() - t0).count());
    log::info("calibrate: tau* %.2f  ECE %.4f  MCE %.4f", tau_star, rep.ece, rep.mce);
    return 0;
  });
}

int cmd_surface(double tau, const CliOptions& opts) {
  return guarded("surface", [&] {
    if (!(std::isfinite(opts.fmin) && std::isfinite(opts.fmax)) || opts.grid < 2) {
      throw ConfigError("surface: need finite grid bounds and grid >= 2");
    }
    const std::string path = opts.out.value_or("surface.csv");
    std::ostringstream csv;
    csv << "f1,f2,ls_p1,ls_p2,sm_p1,sm_p2\n";
    Vec f(3);
    for (int i = 0; i < opts.grid; ++i) {
      const double f1 = opts.fmin + (opts.fmax - opts.fmin) * i / (opts.grid - 1);
      for (int j = 0; j < opts.grid; ++j) {
        const double f2 = opts.fmin + (opts.fmax - opts.fmin) * j / (opts.grid - 1);
        f << f1 + opts.shift, f2 + opts.shift, -100.0 + opts.shift;
        const Vec ls = logistic_softmax(f, tau);
        const Vec sm = softmax_temp(f, tau);
        csv << csv_num(f1) << ',' << csv_num(f2) << ',' << csv_num(ls[0]) << ','
            << csv_num(ls[1]) << ',' << csv_num(sm[0]) << ',' << csv_num(sm[1]) << '\n';
      }
    }
    write_text_file(path, csv.str());
    return 0;
  });
}

int cmd_gibbs_vs_mf(const std::string& config_path, const CliOptions& opts) {
  return guarded("gibbs_vs_mf", [&] {
    const auto t0 = Clock::now();
    RunConfig cfg = load_run_config(config_path);
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.seed) cfg.gibbs_vs_mf.seed = *opts.seed;
    const double tol = opts.tolerance.value_or(cfg.gibbs_vs_mf.tolerance);
    if (cfg.generator.ways > 3 || cfg.generator.ways * cfg.generator.shots > 6) {
      throw ConfigError("gibbs_vs_mf: needs a small problem (C <= 3, support <= 6)");
    }
    fs::create_directories(cfg.output_dir);

    const TaskGenerator gen = make_generator(cfg.generator);
    const HyperParams hyper = make_initial_hyper(cfg);
    MfOptions mf_opts;
    mf_opts.steps = cfg.gibbs_vs_mf.mf_steps;
    mf_opts.early_stop = true;
    mf_opts.tol = 1e-10;

    std::ostringstream csv;
    csv << "episode,point,class,mf_mu,gibbs_mean,abs_diff\n";
    double max_diff = 0.0;
    double sum_diff = 0.0;
    long entries = 0;
    for (int e = 0; e < cfg.gibbs_vs_mf.episodes; ++e) {
      Rng ep_rng = derive_rng(cfg.gibbs_vs_mf.seed, 0x6d66ULL, static_cast<std::uint64_t>(e));
      const Episode ep = sample_episode(gen, ep_rng);
      const MfRun run = run_mean_field(ep.support_X, ep.support_y, ep.num_classes, hyper,
                                       hyper.prior_mean_test, mf_opts);
      Rng chain_rng = derive_rng(cfg.gibbs_vs_mf.seed, 0x6762ULL, static_cast<std::uint64_t>(e));
      const Mat fbar = gibbs_posterior_mean_f(chain_rng, ep.support_X, ep.support_y,
                                              ep.num_classes, hyper, hyper.prior_mean_test,
                                              cfg.gibbs_vs_mf.burn_in, cfg.gibbs_vs_mf.samples);
      for (Index i = 0; i < fbar.rows(); ++i) {
        for (Index c = 0; c < fbar.cols(); ++c) {
          const double diff = std::abs(run.state.mu(i, c) - fbar(i, c));
          max_diff = std::max(max_diff, diff);
          sum_diff += diff;
          ++entries;
          csv << e << ',' << i << ',' << c << ',' << csv_num(run.state.mu(i, c)) << ','
              << csv_num(fbar(i, c)) << ',' << csv_num(diff) << '\n';
        }
      }
    }
    write_text_file(cfg.output_dir + "/gibbs_vs_mf.csv", csv.str());

    Json j = meta_header(cfg, cfg.gibbs_vs_mf.seed);
    j["max_abs_diff"] = max_diff;
    j["mean_abs_diff"] = entries > 0 ? sum_diff / static_cast<double>(entries) : 0.0;
    j["tolerance"] = tol;
    j["pass"] = max_diff < tol;
    write_text_file(cfg.output_dir + "/gibbs_vs_mf.json", j.dump(2) + "\n");
    write_run_meta(cfg.output_dir, "gibbs_vs_mf", cfg, cfg.gibbs_vs_mf.seed,
                   std::chrono::duration<double>(Clock::now() - t0).count());
    log::info("gibbs_vs_mf: max |d| = %.4f (tolerance %.4f)", max_diff, tol);
    return max_diff < tol ? 0 : 1;
  });
}

// ---------------------------------------------------------------------------
// selftest: the fast subset of the verification suite
// ---------------------------------------------------------------------------

namespace {

bool selftest_limit_behavior() {
  Rng rng = make_rng(11);
  const int c_count = 5;
  for (int rep = 0; rep < 200; ++rep) {
    // all-negative logits with pairwise gaps >= 0.05 so the limit is resolved
    Vec f(c_count);
    for (;;) {
      for (int c = 0; c < c_count; ++c) {
        f[c] = -0.1 - 2.9 * draw_uniform(rng);
      }
      double min_gap = 1e9;
      for (int a = 0; a < c_count; ++a)
        for (int b = a + 1; b < c_count; ++b)
          min_gap = std::min(min_gap, std::abs(f[a] - f[b]));
      if (min_gap >= 0.05) break;
    }
    Index best;
    f.maxCoeff(&best);
    Vec target = Vec::Zero(c_count);
    target[best] = 1.0;
    if ((logistic_softmax(f, 1e-3) - target).cwiseAbs().maxCoeff() >= 1e-4) return false;

    // at least two positives: limit is uniform over the positive entries
    Vec g(c_count);
    const int npos = 2 + static_cast<int>(std::uniform_int_distribution<int>(0, c_count - 2)(rng));
    for (int c = 0; c < c_count; ++c) {
      g[c] = c < npos ? 0.1 + 2.9 * draw_uniform(rng) : -0.1 - 2.9 * draw_uniform(rng);
    }
    Vec target2 = Vec::Zero(c_count);
    for (int c = 0; c < npos; ++c) target2[c] = 1.0 / npos;
    if ((logistic_softmax(g, 1e-3) - target2).cwiseAbs().maxCoeff() >= 1e-4) return false;
  }
  return true;
}

bool selftest_softmax_approx() {
  Rng rng = make_rng(12);
  const int c_count = 5;
  double err5 = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Vec f(c_count);
    for (int c = 0; c < c_count; ++c) f[c] = 2.0 * draw_uniform(rng) - 1.0;
    for (double tau : {0.2, 0.5, 1.0}) {
      const Vec sm = softmax_temp(f, tau);
      const Vec shifted5 = f.array() - 5.0;
      err5 = std::max(err5, (logistic_softmax(shifted5, tau) - sm).cwiseAbs().maxCoeff());
      const Vec shifted20 = f.array() - 20.0;
      if ((logistic_softmax(shifted20, tau) - sm).cwiseAbs().maxCoeff() >= 1e-6) return false;
    }
  }
  std::printf("        softmax_approx: max |LS(f-5) - S(f)| = %.3e\n", err5);
  return true;
}

bool selftest_cavi() {
  TaskGeneratorConfig gcfg;
  gcfg.input_dim = 8;
  gcfg.ways = 5;
  gcfg.shots = 1;
  gcfg.queries_per_class = 3;
  gcfg.within_class_std = 0.5;
  gcfg.pool_seed = 5;
  const TaskGenerator gen = make_generator(gcfg);
  const KernelKind kinds[] = {KernelKind::cosine, KernelKind::linear, KernelKind::rbf,
                              KernelKind::matern52, KernelKind::poly1, KernelKind::poly2};
  for (int e = 0; e < 10; ++e) {
    Rng rng = derive_rng(17, static_cast<std::uint64_t>(e));
    const Episode ep = sample_episode(gen, rng);
    HyperParams hyper;
    hyper.feature_map.weights = Mat::Identity(8, 8);
    hyper.feature_map.normalize = true;
    hyper.kernel.kind = kinds[e % 6];
    hyper.kernel.output_scale = 1.5;
    hyper.kernel.lengthscale = 0.8;
    hyper.kernel.offset = 0.3;
    hyper.tau = 0.2;
    const Mat X = combined_inputs(ep);
    const std::vector<int> y = combined_labels(ep);
    const GramBundle bundle = make_bundle(hyper, X, 0.0);
    const Mat Y = one_hot(y, ep.num_classes);
    VariationalState state = init_state(Y, bundle, hyper.tau);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      mf_sweep(state, Y, bundle, hyper.tau);
      const double val = elbo(state, Y, bundle, hyper.tau);
      if (val < prev - 1e-8) return false;
      prev = val;
    }
  }
  return true;
}

bool selftest_pg_moments() {
  Rng rng = make_rng(13);
  const int draws = 20000;
  const struct {
    int b;
    double c;
  } cases[] = {{1, 0.0}, {1, 2.0}, {3, 1.0}};
  for (const auto& cs : cases) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = pg_sample(rng, cs.b, cs.c);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    if (std::abs(mean - pg_mean(static_cast<double>(cs.b), cs.c)) > 4.0 * se) return false;
  }
  return true;
}

bool selftest_elbo_bound() {
  HyperParams hyper;
  hyper.feature_map.weights = Mat::Identity(2, 2);
  hyper.feature_map.normalize = false;
  hyper.kernel.kind = KernelKind::rbf;
  hyper.kernel.output_scale = 1.2;
  hyper.tau = 0.5;
  Mat X(1, 2);
  X << 0.3, -0.4;
  const std::vector<int> labels = {0};
  const GramBundle bundle = make_bundle(hyper, X, 0.0);
  const double log_z = log_evidence_gh(labels, 2, bundle, hyper.tau, 40);
  const Mat Y = one_hot(labels, 2);
  VariationalState state = init_state(Y, bundle, hyper.tau);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    mf_sweep(state, Y, bundle, hyper.tau);
    const double gap = log_z - elbo(state, Y, bundle, hyper.tau);
    if (gap < -1e-9) return false;
    if (gap > prev_gap + 1e-12) return false;
    prev_gap = gap;
  }
  return true;
}

}  // namespace

int cmd_selftest() {
  return guarded("selftest", [&] {
    struct Group {
      const char* name;
      bool (*fn)();
    };
    const Group groups[] = {{"limit_behavior", selftest_limit_behavior},
                            {"softmax_approx", selftest_softmax_approx},
                            {"cavi_monotonicity", selftest_cavi},
                            {"pg_moments", selftest_pg_moments},
                            {"elbo_bound", selftest_elbo_bound}};
    bool all_ok = true;
    for (const auto& g : groups) {
      const bool ok = g.fn();
      std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", g.name);
      all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
  });
}

}  // namespace ccgp
