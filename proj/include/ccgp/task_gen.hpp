#pragma once

#include <cstdint>
#include <string>

#include "ccgp/episode.hpp"
#include "ccgp/rng.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

enum class GeneratorKind { gaussian_prototypes, rotated_mixture };

GeneratorKind generator_kind_from_string(const std::string& name);
std::string to_string(GeneratorKind kind);

struct TaskGeneratorConfig {
  GeneratorKind kind = GeneratorKind::gaussian_prototypes;
  int input_dim = 16;
  int class_pool_size = 64;
  double within_class_std = 0.3;
  double prototype_std = 1.0;
  int ways = 5;               // C
  int shots = 1;              // K
  int queries_per_class = 15;
  std::uint64_t pool_seed = 0;
};

/// Episodic task source. The prototype pool is drawn once at construction
/// and never mutated afterwards.
struct TaskGenerator {
  TaskGeneratorConfig cfg;
  Mat pool;  // class_pool_size x input_dim
};

TaskGenerator make_generator(const TaskGeneratorConfig& cfg);

/// Draws C distinct pool classes (episode label order is the shuffled draw
/// order), then K support and queries_per_class query points per class.
/// rotated_mixture additionally applies one random orthogonal rotation,
/// shared by all points of the episode.
Episode sample_episode(const TaskGenerator& gen, Rng& rng);

}  // namespace ccgp
