#include <cmath>

#include "doctest.h"

#include "ccgp/kernels.hpp"
#include "ccgp/rng.hpp"

using namespace ccgp;

namespace {

Mat random_matrix(Rng& rng, Index r, Index c, double scale = 1.0) {
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = scale * draw_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("map_features basics") {
  Rng rng = make_rng(1);
  const Mat X = random_matrix(rng, 6, 4);

  FeatureMap id{Mat::Identity(4, 4), false};
  CHECK((map_features(id, X) - X).cwiseAbs().maxCoeff() == 0.0);

  FeatureMap norm{random_matrix(rng, 3, 4), true};
  const Mat Z = map_features(norm, X);
  for (Index i = 0; i < Z.rows(); ++i) {
    CHECK(std::abs(Z.row(i).norm() - 1.0) < 1e-10);
  }

  FeatureMap zero{Mat::Zero(3, 4), true};
  const Mat Z0 = map_features(zero, X);
  for (Index i = 0; i < Z0.rows(); ++i) {
    CHECK(Z0(i, 0) == 1.0);
    CHECK(Z0.row(i).tail(2).cwiseAbs().maxCoeff() == 0.0);
  }

  FeatureMap bad{random_matrix(rng, 3, 5), false};
  CHECK_THROWS_AS(map_features(bad, X), std::invalid_argument);
}

TEST_CASE("gram pinned values") {
  Mat z(1, 3);
  z << 0.2, -0.4, 0.9;
  KernelSpec rbf{KernelKind::rbf, 1.7, 0.6, 0.0};
  CHECK(gram(rbf, z, z)(0, 0) == doctest::Approx(1.7).epsilon(1e-12));

  Mat u(1, 2), v(1, 2);
  u << 1.0, 0.0;
  v << 0.0, 1.0;
  KernelSpec cos{KernelKind::cosine, 2.0, 1.0, 0.0};
  CHECK(gram(cos, u, u)(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  KernelSpec lin{KernelKind::linear, 1.0, 1.0, 0.0};
  CHECK(gram(lin, u, v)(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gram PSD, symmetry, permutation equivariance per kind") {
  Rng rng = make_rng(2);
  const KernelKind kinds[] = {KernelKind::cosine, KernelKind::linear, KernelKind::rbf,
                              KernelKind::matern52, KernelKind::poly1, KernelKind::poly2};
  for (KernelKind kind : kinds) {
    KernelSpec spec{kind, 1.3, 0.9, 0.2};
    for (int rep = 0; rep < 50; ++rep) {
      const Index n = 3 + static_cast<Index>(std::uniform_int_distribution<int>(0, 17)(rng));
      const Mat Z = random_matrix(rng, n, 5);
      const Mat K = gram(spec, Z, Z);
      CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::SelfAdjointEigenSolver<Mat> es(K);
      CHECK(es.eigenvalues().minCoeff() > -1e-8);
      CHECK((gram_diag(spec, Z) - K.diagonal()).cwiseAbs().maxCoeff() < 1e-12);

      if (rep == 0) {
        // row permutation: gram(PZ, PZ) = P gram(Z,Z) P^T
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = n - 1 - i;
        Mat Zp(n, Z.cols());
        for (Index i = 0; i < n; ++i) Zp.row(i) = Z.row(perm[static_cast<std::size_t>(i)]);
        const Mat Kp = gram(spec, Zp, Zp);
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j)
            CHECK(Kp(i, j) == doctest::Approx(K(perm[static_cast<std::size_t>(i)],
                                                perm[static_cast<std::size_t>(j)]))
                                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cosine gram entries bounded by the output scale") {
  Rng rng = make_rng(3);
  KernelSpec spec{KernelKind::cosine, 0.8, 1.0, 0.0};
  const Mat Z = random_matrix(rng, 12, 4);
  const Mat K = gram(spec, Z, Z);
  CHECK(K.maxCoeff() <= 0.8 + 1e-12);
  CHECK(K.minCoeff() >= -0.8 - 1e-12);
}

TEST_CASE("chol_jitter pinned behavior") {
  SUBCASE("identity absorbs the first jitter level") {
    const PsdFactor f = chol_jitter(Mat::Identity(3, 3));
    CHECK(f.jitter == doctest::Approx(1e-6).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
      CHECK(f.L(i, i) == doctest::Approx(std::sqrt(1.0 + 1e-6)).epsilon(1e-12));
    }
  }
  SUBCASE("reconstruction: L L^T = K + jitter I") {
    Rng rng = make_rng(4);
    const Mat A = random_matrix(rng, 6, 6);
    const Mat K = A * A.transpose() + Mat::Identity(6, 6);
    const PsdFactor f = chol_jitter(K);
    const Mat recon = f.L * f.L.transpose();
    const Mat expect = K + f.jitter * Mat::Identity(6, 6);
    CHECK((recon - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("a -1 eigenvalue is not repairable") {
    Mat K = Mat::Identity(3, 3);
    K(2, 2) = -1.0;
    CHECK_THROWS_AS(chol_jitter(K), EpisodeAbort);
  }
  SUBCASE("asymmetric input rejected") {
    Mat K = Mat::Identity(3, 3);
    K(0, 1) = 0.5;
    CHECK_THROWS_AS(chol_jitter(K), std::invalid_argument);
  }
}

TEST_CASE("solve_psd round trips") {
  Rng rng = make_rng(5);
  const Mat A = random_matrix(rng, 8, 8);
  const Mat K = A * A.transpose() + 2.0 * Mat::Identity(8, 8);
  const PsdFactor f = chol_jitter(K);
  const Mat Kj = K + f.jitter * Mat::Identity(8, 8);

  const PsdFactor fi = chol_jitter(Mat(Mat::Identity(4, 4)));
  const Mat B = random_matrix(rng, 4, 2);
  CHECK((solve_psd(fi, B) - B / (1.0 + fi.jitter)).cwiseAbs().maxCoeff() < 1e-12);

  const Mat B2 = random_matrix(rng, 8, 3);
  const Mat X = solve_psd(f, B2);
  CHECK(((Kj * X - B2).cwiseAbs().maxCoeff() / B2.cwiseAbs().maxCoeff()) < 1e-7);

  const Mat I = solve_psd(f, Kj);
  CHECK((I - Mat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-7);

  CHECK(f.log_det() == doctest::Approx(std::log(Kj.determinant())).epsilon(1e-9));
}

TEST_CASE("make_bundle carries the constant prior mean") {
  Rng rng = make_rng(6);
  HyperParams h;
  h.feature_map.weights = random_matrix(rng, 3, 5);
  h.kernel.kind = KernelKind::cosine;
  const Mat X = random_matrix(rng, 7, 5);
  const GramBundle b = make_bundle(h, X, -5.0);
  CHECK(b.a.size() == 7);
  CHECK(b.a.minCoeff() == -5.0);
  CHECK(b.a.maxCoeff() == -5.0);
  CHECK(b.K.rows() == 7);
  // factand reconstruction within jitter
  const Mat recon = b.chol.L * b.chol.L.transpose();
  CHECK((recon - b.K).cwiseAbs().maxCoeff() < b.chol.jitter + 1e-10);
}

TEST_CASE("theta pack/unpack round trip per kernel kind") {
  Rng rng = make_rng(7);
  for (KernelKind kind : {KernelKind::cosine, KernelKind::rbf, KernelKind::poly2}) {
    HyperParams h;
    h.feature_map.weights = random_matrix(rng, 4, 6);
    h.kernel.kind = kind;
    h.kernel.output_scale = 1.7;
    h.kernel.lengthscale = 0.4;
    h.kernel.offset = -0.3;
    h.tau = 0.2;
    const Vec theta = theta_pack(h);
    const Index expected = 24 + (kind == KernelKind::cosine ? 1 : 2);
    CHECK(theta.size() == expected);
    const HyperParams h2 = theta_unpack(h, theta);
    CHECK((h2.feature_map.weights - h.feature_map.weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h2.kernel.output_scale == doctest::Approx(1.7).epsilon(1e-12));
    if (kind == KernelKind::rbf) {
      CHECK(h2.kernel.lengthscale == doctest::Approx(0.4).epsilon(1e-12));
    }
    if (kind == KernelKind::poly2) {
      CHECK(h2.kernel.offset == doctest::Approx(-0.3).epsilon(1e-12));
    }
    CHECK(h2.tau == h.tau);
    const auto mask = theta_feature_mask(h);
    CHECK(static_cast<Index>(mask.size()) == theta.size());
    CHECK(mask[0]);
    CHECK_FALSE(mask[static_cast<std::size_t>(theta.size() - 1)]);
  }
}
