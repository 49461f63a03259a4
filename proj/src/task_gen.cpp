#include "ccgp/task_gen.hpp"

#include <numeric>
#include <stdexcept>

namespace ccgp {

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "gaussian_prototypes") return GeneratorKind::gaussian_prototypes;
  if (name == "rotated_mixture") return GeneratorKind::rotated_mixture;
  throw std::invalid_argument("unknown generator kind: " + name);
}

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::gaussian_prototypes ? "gaussian_prototypes"
                                                    : "rotated_mixture";
}

namespace {

void validate(const TaskGeneratorConfig& cfg) {
  if (cfg.input_dim < 1) throw std::invalid_argument("generator: input_dim >= 1");
  if (cfg.ways < 2) throw std::invalid_argument("generator: ways >= 2");
  if (cfg.class_pool_size < cfg.ways) {
    throw std::invalid_argument("generator: class_pool_size >= ways");
  }
  if (cfg.shots < 1 || cfg.queries_per_class < 1) {
    throw std::invalid_argument("generator: shots and queries_per_class >= 1");
  }
  if (!(cfg.within_class_std > 0.0) || !(cfg.prototype_std > 0.0)) {
    throw std::invalid_argument("generator: stds must be > 0");
  }
}

// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the sign
// of R's diagonal folded into Q.
Mat random_orthogonal(int d, Rng& rng) {
  Mat g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = draw_normal(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

TaskGenerator make_generator(const TaskGeneratorConfig& cfg) {
  validate(cfg);
  TaskGenerator gen;
  gen.cfg = cfg;
  Rng rng = derive_rng(cfg.pool_seed, 0x706f6f6cULL);  // pool stream
  gen.pool.resize(cfg.class_pool_size, cfg.input_dim);
  for (Index i = 0; i < gen.pool.rows(); ++i)
    for (Index j = 0; j < gen.pool.cols(); ++j)
      gen.pool(i, j) = cfg.prototype_std * draw_normal(rng);
  return gen;
}

Episode sample_episode(const TaskGenerator& gen, Rng& rng) {
  const auto& cfg = gen.cfg;
  // choose C distinct pool indices; the draw order is the label order
  std::vector<int> indices(static_cast<std::size_t>(cfg.class_pool_size));
  std::iota(indices.begin(), indices.end(), 0);
  for (int c = 0; c < cfg.ways; ++c) {
    const int j = c + static_cast<int>(
        std::uniform_int_distribution<int>(0, cfg.class_pool_size - 1 - c)(rng));
    std::swap(indices[static_cast<std::size_t>(c)], indices[static_cast<std::size_t>(j)]);
  }

  Episode ep;
  ep.num_classes = cfg.ways;
  ep.support_X.resize(static_cast<Index>(cfg.ways) * cfg.shots, cfg.input_dim);
  ep.query_X.resize(static_cast<Index>(cfg.ways) * cfg.queries_per_class, cfg.input_dim);
  Index si = 0;
  Index qi = 0;
  for (int c = 0; c < cfg.ways; ++c) {
    const auto proto = gen.pool.row(indices[static_cast<std::size_t>(c)]);
    for (int k = 0; k < cfg.shots; ++k, ++si) {
      for (Index j = 0; j < cfg.input_dim; ++j) {
        ep.support_X(si, j) = proto[j] + cfg.within_class_std * draw_normal(rng);
      }
      ep.support_y.push_back(c);
    }
    for (int k = 0; k < cfg.queries_per_class; ++k, ++qi) {
      for (Index j = 0; j < cfg.input_dim; ++j) {
        ep.query_X(qi, j) = proto[j] + cfg.within_class_std * draw_normal(rng);
      }
      ep.query_y.push_back(c);
    }
  }

  if (cfg.kind == GeneratorKind::rotated_mixture) {
    const Mat rot = random_orthogonal(cfg.input_dim, rng);
    ep.support_X = ep.support_X * rot.transpose();
    ep.query_X = ep.query_X * rot.transpose();
  }
  return ep;
}

}  // namespace ccgp
