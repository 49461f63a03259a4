#include "ccgp/config.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>

#include "ccgp/rng.hpp"

namespace ccgp {

namespace {

void check_keys(const Json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("config: unknown key '" + item.key() + "' in " + section);
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config: bad type for '") + key + "'");
  }
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError("config: " + msg);
}

TaskGeneratorConfig parse_generator(const Json& j) {
  check_keys(j, "generator",
             {"kind", "input_dim", "class_pool_size", "within_class_std",
              "prototype_std", "ways", "shots", "queries_per_class", "pool_seed"});
  TaskGeneratorConfig g;
  try {
    g.kind = generator_kind_from_string(get_or<std::string>(j, "kind", "gaussian_prototypes"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  g.input_dim = get_or(j, "input_dim", g.input_dim);
  g.class_pool_size = get_or(j, "class_pool_size", g.class_pool_size);
  g.within_class_std = get_or(j, "within_class_std", g.within_class_std);
  g.prototype_std = get_or(j, "prototype_std", g.prototype_std);
  g.ways = get_or(j, "ways", g.ways);
  g.shots = get_or(j, "shots", g.shots);
  g.queries_per_class = get_or(j, "queries_per_class", g.queries_per_class);
  g.pool_seed = get_or(j, "pool_seed", g.pool_seed);
  require(g.input_dim >= 1, "generator.input_dim >= 1");
  require(g.ways >= 2, "generator.ways >= 2");
  require(g.class_pool_size >= g.ways, "generator.class_pool_size >= ways");
  require(g.shots >= 1 && g.queries_per_class >= 1, "generator shots/queries >= 1");
  require(g.within_class_std > 0.0 && g.prototype_std > 0.0, "generator stds > 0");
  return g;
}

KernelSpec parse_kernel(const Json& j) {
  check_keys(j, "kernel", {"kind", "output_scale", "lengthscale", "offset"});
  KernelSpec k;
  try {
    k.kind = kernel_kind_from_string(get_or<std::string>(j, "kind", "cosine"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  k.output_scale = get_or(j, "output_scale", k.output_scale);
  k.lengthscale = get_or(j, "lengthscale", k.lengthscale);
  k.offset = get_or(j, "offset", k.offset);
  require(k.output_scale > 0.0, "kernel.output_scale > 0");
  require(k.lengthscale > 0.0, "kernel.lengthscale > 0");
  return k;
}

HyperInitConfig parse_hyper_init(const Json& j) {
  check_keys(j, "hyper_init",
             {"feature_dim", "normalize", "kernel", "tau", "prior_mean_train",
              "prior_mean_test", "init_seed", "init_scale"});
  HyperInitConfig h;
  h.feature_dim = get_or(j, "feature_dim", h.feature_dim);
  h.normalize = get_or(j, "normalize", h.normalize);
  if (j.contains("kernel")) h.kernel = parse_kernel(j.at("kernel"));
  h.tau = get_or(j, "tau", h.tau);
  h.prior_mean_train = get_or(j, "prior_mean_train", h.prior_mean_train);
  h.prior_mean_test = get_or(j, "prior_mean_test", h.prior_mean_test);
  h.init_seed = get_or(j, "init_seed", h.init_seed);
  h.init_scale = get_or(j, "init_scale", h.init_scale);
  require(h.feature_dim >= 1, "hyper_init.feature_dim >= 1");
  require(h.tau > 0.0, "hyper_init.tau > 0");
  require(h.init_scale > 0.0, "hyper_init.init_scale > 0");
  return h;
}

LossConfig parse_loss(const Json& j) {
  check_keys(j, "train.loss", {"kind", "inner_steps", "mc_samples", "fd_step", "rng_seed"});
  LossConfig l;
  const std::string kind = get_or<std::string>(j, "kind", "ML");
  if (kind == "ML") l.kind = LossKind::ml;
  else if (kind == "PL") l.kind = LossKind::pl;
  else throw ConfigError("config: loss.kind must be ML or PL");
  l.inner_steps = get_or(j, "inner_steps", l.inner_steps);
  l.mc_samples = get_or(j, "mc_samples", l.mc_samples);
  l.fd_step = get_or(j, "fd_step", l.fd_step);
  l.rng_seed = get_or(j, "rng_seed", l.rng_seed);
  require(l.inner_steps >= 1, "loss.inner_steps >= 1");
  require(l.mc_samples >= 1, "loss.mc_samples >= 1");
  require(l.fd_step > 0.0, "loss.fd_step > 0");
  return l;
}

TrainConfig parse_train(const Json& j) {
  check_keys(j, "train",
             {"epochs", "episodes_per_epoch", "loss", "lr_feature_map", "lr_kernel",
              "seed", "meta_batch", "checkpoint_path", "workers", "max_abort_rate"});
  TrainConfig t;
  t.epochs = get_or(j, "epochs", t.epochs);
  t.episodes_per_epoch = get_or(j, "episodes_per_epoch", t.episodes_per_epoch);
  if (j.contains("loss")) t.loss = parse_loss(j.at("loss"));
  t.lr_feature_map = get_or(j, "lr_feature_map", t.lr_feature_map);
  t.lr_kernel = get_or(j, "lr_kernel", t.lr_kernel);
  t.seed = get_or(j, "seed", t.seed);
  t.meta_batch = get_or(j, "meta_batch", t.meta_batch);
  t.checkpoint_path = get_or<std::string>(j, "checkpoint_path", t.checkpoint_path);
  t.workers = get_or(j, "workers", t.workers);
  t.max_abort_rate = get_or(j, "max_abort_rate", t.max_abort_rate);
  require(t.epochs >= 1, "train.epochs >= 1");
  require(t.episodes_per_epoch >= 1, "train.episodes_per_epoch >= 1");
  require(t.lr_feature_map > 0.0 && t.lr_kernel > 0.0, "train learning rates > 0");
  require(t.meta_batch >= 1, "train.meta_batch >= 1");
  require(t.episodes_per_epoch % t.meta_batch == 0,
          "train.meta_batch must divide episodes_per_epoch");
  require(t.workers >= 1, "train.workers >= 1");
  return t;
}

EvalConfig parse_eval(const Json& j) {
  check_keys(j, "eval",
             {"batches", "episodes_per_batch", "inner_steps", "mc_samples", "seed", "workers"});
  EvalConfig e;
  e.batches = get_or(j, "batches", e.batches);
  e.episodes_per_batch = get_or(j, "episodes_per_batch", e.episodes_per_batch);
  e.inner_steps = get_or(j, "inner_steps", e.inner_steps);
  e.mc_samples = get_or(j, "mc_samples", e.mc_samples);
  e.seed = get_or(j, "seed", std::uint64_t{1});
  e.workers = get_or(j, "workers", e.workers);
  require(e.batches >= 1 && e.episodes_per_batch >= 1, "eval sizes >= 1");
  require(e.inner_steps >= 1 && e.mc_samples >= 1, "eval steps/samples >= 1");
  require(e.workers >= 1, "eval.workers >= 1");
  return e;
}

CalibrateConfig parse_calibrate(const Json& j) {
  check_keys(j, "calibrate",
             {"bins", "tau_grid", "val_episodes", "test_episodes", "val_seed", "test_seed"});
  CalibrateConfig c;
  c.bins = get_or(j, "bins", c.bins);
  if (j.contains("tau_grid")) {
    c.tau_grid.clear();
    for (const auto& v : j.at("tau_grid")) c.tau_grid.push_back(v.get<double>());
  }
  c.val_episodes = get_or(j, "val_episodes", c.val_episodes);
  c.test_episodes = get_or(j, "test_episodes", c.test_episodes);
  c.val_seed = get_or(j, "val_seed", c.val_seed);
  c.test_seed = get_or(j, "test_seed", c.test_seed);
  require(c.bins >= 1, "calibrate.bins >= 1");
  require(!c.tau_grid.empty(), "calibrate.tau_grid non-empty");
  for (double t : c.tau_grid) require(t > 0.0, "calibrate.tau_grid entries > 0");
  require(c.val_episodes >= 1 && c.test_episodes >= 1, "calibrate episode counts >= 1");
  return c;
}

GibbsVsMfConfig parse_gibbs_vs_mf(const Json& j) {
  check_keys(j, "gibbs_vs_mf",
             {"episodes", "burn_in", "samples", "tolerance", "mf_steps", "seed"});
  GibbsVsMfConfig g;
  g.episodes = get_or(j, "episodes", g.episodes);
  g.burn_in = get_or(j, "burn_in", g.burn_in);
  g.samples = get_or(j, "samples", g.samples);
  g.tolerance = get_or(j, "tolerance", g.tolerance);
  g.mf_steps = get_or(j, "mf_steps", g.mf_steps);
  g.seed = get_or(j, "seed", g.seed);
  require(g.episodes >= 1, "gibbs_vs_mf.episodes >= 1");
  require(g.burn_in >= 0 && g.samples >= 1, "gibbs_vs_mf chain lengths");
  require(g.tolerance > 0.0, "gibbs_vs_mf.tolerance > 0");
  require(g.mf_steps >= 1, "gibbs_vs_mf.mf_steps >= 1");
  return g;
}

}  // namespace

RunConfig parse_run_config(const Json& j) {
  check_keys(j, "(root)",
             {"generator", "hyper_init", "train", "eval", "calibrate", "gibbs_vs_mf",
              "output_dir"});
  RunConfig cfg;
  if (j.contains("generator")) cfg.generator = parse_generator(j.at("generator"));
  if (j.contains("hyper_init")) cfg.hyper_init = parse_hyper_init(j.at("hyper_init"));
  if (j.contains("train")) cfg.train = parse_train(j.at("train"));
  if (j.contains("eval")) cfg.eval = parse_eval(j.at("eval"));
  if (j.contains("calibrate")) cfg.calibrate = parse_calibrate(j.at("calibrate"));
  if (j.contains("gibbs_vs_mf")) cfg.gibbs_vs_mf = parse_gibbs_vs_mf(j.at("gibbs_vs_mf"));
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  require(!cfg.output_dir.empty(), "output_dir non-empty");
  cfg.hash = config_hash(j);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file not found: " + path);
  }
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

HyperParams make_initial_hyper(const RunConfig& cfg) {
  HyperParams h;
  const int d = cfg.generator.input_dim;
  const int dp = cfg.hyper_init.feature_dim;
  Rng rng = derive_rng(cfg.hyper_init.init_seed, 0x57696e69ULL);
  h.feature_map.weights.resize(dp, d);
  const double scale = cfg.hyper_init.init_scale / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < dp; ++i)
    for (Index j = 0; j < d; ++j) h.feature_map.weights(i, j) = scale * draw_normal(rng);
  h.feature_map.normalize = cfg.hyper_init.normalize;
  h.kernel = cfg.hyper_init.kernel;
  h.tau = cfg.hyper_init.tau;
  h.prior_mean_train = cfg.hyper_init.prior_mean_train;
  h.prior_mean_test = cfg.hyper_init.prior_mean_test;
  return h;
}

}  // namespace ccgp
