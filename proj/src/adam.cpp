#include "ccgp/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ccgp {

AdamState make_adam_state(Index size) {
  AdamState s;
  s.m = Vec::Zero(size);
  s.v = Vec::Zero(size);
  return s;
}

void adam_step(AdamState& state, Vec& theta, const Eigen::Ref<const Vec>& grad,
               const Eigen::Ref<const Vec>& lr) {
  if (theta.size() != grad.size() || theta.size() != lr.size() ||
      theta.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  theta.array() -=
      lr.array() * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.eps);
}

}  // namespace ccgp
