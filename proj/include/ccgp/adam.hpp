#pragma once

#include "ccgp/types.hpp"

namespace ccgp {

struct AdamState {
  Vec m;  // first-moment accumulator
  Vec v;  // second-moment accumulator
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(Index size);

/// Standard bias-corrected Adam update with a per-coordinate learning rate.
/// Positivity-constrained parameters live in log space inside theta, so any
/// gradient keeps them positive.
void adam_step(AdamState& state, Vec& theta, const Eigen::Ref<const Vec>& grad,
               const Eigen::Ref<const Vec>& lr);

}  // namespace ccgp
