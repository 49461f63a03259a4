#include <cmath>
#include <vector>

#include "doctest.h"

#include "ccgp/elbo.hpp"
#include "ccgp/math.hpp"
#include "ccgp/predict.hpp"
#include "ccgp/quadrature.hpp"
#include "ccgp/rng.hpp"
#include "ccgp/task_gen.hpp"

using namespace ccgp;

namespace {

Episode gen_episode(int seed, int ways = 3, int shots = 1, int queries = 3, int d = 6) {
  TaskGeneratorConfig cfg;
  cfg.input_dim = d;
  cfg.ways = ways;
  cfg.shots = shots;
  cfg.queries_per_class = queries;
  cfg.within_class_std = 0.5;
  cfg.pool_seed = 7;
  const TaskGenerator gen = make_generator(cfg);
  Rng rng = make_rng(static_cast<std::uint64_t>(seed));
  return sample_episode(gen, rng);
}

HyperParams hyper_for(KernelKind kind, int d = 6, double tau = 0.4) {
  HyperParams h;
  h.feature_map.weights = Mat::Identity(d, d);
  h.feature_map.normalize = (kind == KernelKind::cosine);
  h.kernel.kind = kind;
  h.kernel.output_scale = 1.3;
  h.kernel.lengthscale = 1.0;
  h.kernel.offset = 0.4;
  h.tau = tau;
  return h;
}

}  // namespace

TEST_CASE("elbo decomposes into its five exposed terms") {
  const Episode ep = gen_episode(1);
  const HyperParams h = hyper_for(KernelKind::rbf);
  const Mat X = combined_inputs(ep);
  const GramBundle b = make_bundle(h, X, 0.0);
  const Mat Y = one_hot(combined_labels(ep), ep.num_classes);
  VariationalState s = init_state(Y, b, h.tau);
  for (int k = 0; k < 3; ++k) mf_sweep(s, Y, b, h.tau);
  const ElboTerms t = elbo_terms(s, Y, b, h.tau);
  const double manual = t.expected_log_lik - t.kl_f - t.kl_lambda - t.kl_m - t.kl_omega;
  CHECK(std::abs(t.value() - manual) < 1e-12);
  CHECK(elbo(s, Y, b, h.tau) == t.value());
}

TEST_CASE("KL(q(F)||p(F)) vanishes at the prior") {
  const Episode ep = gen_episode(2);
  const HyperParams h = hyper_for(KernelKind::matern52);
  const Mat X = combined_inputs(ep);
  const GramBundle b = make_bundle(h, X, -0.8);
  const Mat Y = one_hot(combined_labels(ep), ep.num_classes);
  const VariationalState s = init_state(Y, b, h.tau);  // mu = a, Sigma = K
  const ElboTerms t = elbo_terms(s, Y, b, h.tau);
  CHECK(std::abs(t.kl_f) < 1e-9);
}

TEST_CASE("elbo stays below the quadrature evidence with a shrinking gap") {
  for (double prior_mean : {0.0, -1.0}) {
    HyperParams h = hyper_for(KernelKind::rbf, 2, 0.5);
    h.feature_map.normalize = false;
    Mat X(1, 2);
    X << 0.4, -0.2;
    const std::vector<int> labels = {0};
    const GramBundle b = make_bundle(h, X, prior_mean);
    const double log_z = log_evidence_gh(labels, 2, b, h.tau, 40);
    const Mat Y = one_hot(labels, 2);
    VariationalState s = init_state(Y, b, h.tau);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
      mf_sweep(s, Y, b, h.tau);
      const double gap = log_z - elbo(s, Y, b, h.tau);
      CHECK(gap > -1e-9);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
  }
}

TEST_CASE("quadrature rule sanity") {
  const GaussHermite gh = gauss_hermite(40);
  CHECK(gh.weights.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK((gh.weights.array() * gh.nodes.array().square()).sum() ==
        doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("CAVI monotonicity across kernels") {
  const KernelKind kinds[] = {KernelKind::cosine, KernelKind::linear, KernelKind::rbf,
                              KernelKind::matern52, KernelKind::poly1, KernelKind::poly2};
  for (int seed = 0; seed < 18; ++seed) {
    const Episode ep = gen_episode(seed + 100, 2 + seed % 4, 1 + seed % 2, 2);
    const HyperParams h = hyper_for(kinds[seed % 6], 6, seed % 2 == 0 ? 0.2 : 1.0);
    const Mat X = combined_inputs(ep);
    const GramBundle b = make_bundle(h, X, 0.0);
    const Mat Y = one_hot(combined_labels(ep), ep.num_classes);
    VariationalState s = init_state(Y, b, h.tau);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      mf_sweep(s, Y, b, h.tau);
      const double v = elbo(s, Y, b, h.tau);
      CHECK(v >= prev - 1e-8);
      prev = v;
    }
  }
}

TEST_CASE("ml_loss: determinism, sweep monotonicity, smoke") {
  const Episode ep = gen_episode(3);
  const HyperParams h = hyper_for(KernelKind::cosine);
  LossConfig cfg;
  cfg.kind = LossKind::ml;
  cfg.inner_steps = 2;
  CHECK(ml_loss(ep, h, cfg) == ml_loss(ep, h, cfg));

  LossConfig one = cfg;
  one.inner_steps = 1;
  CHECK(ml_loss(ep, h, cfg) <= ml_loss(ep, h, one) + 1e-8);

  for (int seed = 0; seed < 30; ++seed) {
    const Episode e2 = gen_episode(seed + 500, 2 + seed % 3);
    CHECK(std::isfinite(ml_loss(e2, h, cfg)));
  }
}

TEST_CASE("ml_loss is invariant to class relabeling") {
  const Episode ep = gen_episode(4, 4);
  const HyperParams h = hyper_for(KernelKind::rbf);
  LossConfig cfg;
  cfg.inner_steps = 2;
  const double base = ml_loss(ep, h, cfg);

  // rotate class ids by 1
  Episode rel = ep;
  for (int& y : rel.support_y) y = (y + 1) % rel.num_classes;
  for (int& y : rel.query_y) y = (y + 1) % rel.num_classes;
  CHECK(std::abs(ml_loss(rel, h, cfg) - base) < 1e-10);
}

TEST_CASE("ml_loss responds to the prior-mean setting") {
  const Episode ep = gen_episode(5);
  HyperParams h = hyper_for(KernelKind::cosine);
  LossConfig cfg;
  const double at_zero = ml_loss(ep, h, cfg);
  h.prior_mean_train = -5.0;
  const double at_neg = ml_loss(ep, h, cfg);
  CHECK(std::abs(at_zero - at_neg) > 1e-6);
}

TEST_CASE("pl_loss: common random numbers, positivity, variance scaling") {
  const Episode ep = gen_episode(6);
  const HyperParams h = hyper_for(KernelKind::rbf);
  LossConfig cfg;
  cfg.kind = LossKind::pl;
  cfg.inner_steps = 3;
  cfg.mc_samples = 32;
  cfg.rng_seed = 11;
  const double l1 = pl_loss(ep, h, cfg);
  CHECK(l1 == pl_loss(ep, h, cfg));
  CHECK(l1 >= 0.0);

  auto variance_over_seeds = [&](int m) {
    LossConfig c = cfg;
    c.mc_samples = m;
    std::vector<double> vals;
    for (int s = 0; s < 40; ++s) {
      c.rng_seed = static_cast<std::uint64_t>(1000 + s);
      vals.push_back(pl_loss(ep, h, c));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return var / (vals.size() - 1);
  };
  const double v16 = variance_over_seeds(16);
  const double v256 = variance_over_seeds(256);
  CHECK(v256 < v16 / 3.0);  // expect roughly 1/16
}

TEST_CASE("pl_loss collapses to the plug-in cross entropy at tiny variance") {
  // query equals support and a tiny prior scale forces sigma_*^2 ~ 0
  Episode ep = gen_episode(7, 2, 2, 1);
  ep.query_X = ep.support_X;
  ep.query_y = ep.support_y;
  HyperParams h = hyper_for(KernelKind::rbf);
  h.kernel.output_scale = 1e-6;
  h.tau = 1.0;
  LossConfig cfg;
  cfg.kind = LossKind::pl;
  cfg.inner_steps = 10;
  cfg.mc_samples = 64;
  cfg.rng_seed = 5;
  const double loss = pl_loss(ep, h, cfg);

  MfOptions opts;
  opts.steps = 10;
  const MfRun run = run_mean_field(ep.support_X, ep.support_y, ep.num_classes, h,
                                   h.prior_mean_train, opts);
  const PredictiveMoments pm =
      predictive_moments(run.state, run.bundle, h, ep.support_X, ep.query_X);
  double plug_in = 0.0;
  for (Index q = 0; q < pm.mu.rows(); ++q) {
    const Vec p = logistic_softmax(pm.mu.row(q).transpose(), h.tau);
    plug_in -= std::log(p[ep.query_y[static_cast<std::size_t>(q)]]);
  }
  plug_in /= static_cast<double>(pm.mu.rows());
  CHECK(std::abs(loss - plug_in) < 1e-3);
}

TEST_CASE("fd_grad recovers the analytic gradient of a quadratic") {
  HyperParams h = hyper_for(KernelKind::rbf, 3);
  Rng rng = make_rng(8);
  for (Index i = 0; i < h.feature_map.weights.size(); ++i) {
    h.feature_map.weights.data()[i] = draw_normal(rng);
  }
  LossConfig cfg;
  cfg.fd_step = 1e-5;
  const Vec theta0 = theta_pack(h);
  const GradReport rep =
      fd_grad([](const HyperParams& hp) { return theta_pack(hp).squaredNorm(); }, h, cfg);
  for (Index i = 0; i < theta0.size(); ++i) {
    CHECK(std::abs(rep.grad[i] - 2.0 * theta0[i]) <=
          1e-6 * std::max(1.0, std::abs(2.0 * theta0[i])));
  }
  CHECK(rep.loss_value == doctest::Approx(theta0.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("fd_grad workers do not change the result") {
  const Episode ep = gen_episode(9);
  const HyperParams h = hyper_for(KernelKind::cosine);
  LossConfig cfg;
  auto loss = [&](const HyperParams& hp) { return ml_loss(ep, hp, cfg); };
  const GradReport a = fd_grad(loss, h, cfg, 1);
  const GradReport b = fd_grad(loss, h, cfg, 4);
  CHECK(a.grad == b.grad);
}

TEST_CASE("fd Richardson consistency on the ML loss") {
  const Episode ep = gen_episode(10);
  const HyperParams h = hyper_for(KernelKind::rbf);
  LossConfig cfg;
  cfg.fd_step = 1e-4;
  auto loss = [&](const HyperParams& hp) { return ml_loss(ep, hp, cfg); };
  const GradReport g1 = fd_grad(loss, h, cfg);
  LossConfig half = cfg;
  half.fd_step = 5e-5;
  const GradReport g2 = fd_grad(loss, h, half);
  const double scale = std::max(g1.grad.cwiseAbs().maxCoeff(), 1e-12);
  CHECK((g1.grad - g2.grad).cwiseAbs().maxCoeff() / scale < 1e-3);
}

TEST_CASE("analytic derivative of the Gaussian KL term (frozen state)") {
  // N=2, C=2, RBF; only kl_f depends on the kernel scale when the state is
  // frozen, and K = v * R with R fixed, so
  //   d elbo / d log v = -0.5 * sum_c (N - tr(R^{-1} Sigma_c)/v - r_c' R^{-1} r_c / v).
  HyperParams h = hyper_for(KernelKind::rbf, 2, 0.6);
  h.feature_map.normalize = false;
  h.kernel.output_scale = 1.7;
  Mat X(2, 2);
  X << 0.2, -0.5, 0.9, 0.4;
  const std::vector<int> labels = {0, 1};
  const Mat Y = one_hot(labels, 2);
  const GramBundle b0 = make_bundle(h, X, 0.0);
  VariationalState frozen = init_state(Y, b0, h.tau);
  for (int k = 0; k < 4; ++k) mf_sweep(frozen, Y, b0, h.tau);

  LossConfig cfg;
  cfg.fd_step = 1e-6;
  auto loss = [&](const HyperParams& hp) {
    const GramBundle b = make_bundle(hp, X, 0.0);
    return elbo(frozen, Y, b, hp.tau);
  };
  const GradReport rep = fd_grad(loss, h, cfg);
  const Index scale_coord = theta_size(h) - 2;  // log(output_scale)

  const double v = h.kernel.output_scale;
  const Mat r_eff = b0.K / v;  // jitter scales with v, so R is v-invariant
  const Mat r_inv = r_eff.inverse();
  double analytic = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Vec rc = b0.a - frozen.mu.col(c);
    analytic += -0.5 * (2.0 - (r_inv * frozen.sigma[static_cast<std::size_t>(c)]).trace() / v -
                        rc.dot(r_inv * rc) / v);
  }
  CHECK(std::abs(rep.grad[scale_coord] - analytic) <=
        1e-5 * std::max(1.0, std::abs(analytic)));
}

TEST_CASE("elbo rejects a corrupted state with a named term") {
  const Episode ep = gen_episode(11);
  const HyperParams h = hyper_for(KernelKind::rbf);
  const Mat X = combined_inputs(ep);
  const GramBundle b = make_bundle(h, X, 0.0);
  const Mat Y = one_hot(combined_labels(ep), ep.num_classes);
  VariationalState s = init_state(Y, b, h.tau);
  s.mu(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(elbo(s, Y, b, h.tau), doctest::Contains("expected_log_lik"),
                       std::runtime_error);
}
