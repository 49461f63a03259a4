#pragma once

#include <cmath>

#include "ccgp/types.hpp"

namespace ccgp {

/// log sigma(x), branch-switched so exp never overflows.
template <typename T>
inline T log_sigmoid(T x) {
  if (x >= T(0)) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

/// log cosh(x) = |x| + log1p(exp(-2|x|)) - log 2.
template <typename T>
inline T log_cosh(T x) {
  const T ax = std::abs(x);
  return ax + std::log1p(std::exp(T(-2) * ax)) - T(0.6931471805599453);
}

/// Mean of PG(b, c): b/(2c) tanh(c/2), with the analytic limit b/4 near c=0.
template <typename T>
inline T pg_mean(T b, T c) {
  if (b == T(0)) return T(0);
  if (std::abs(c) < T(1e-8)) return b / T(4);  // tanh(c/2)/(2c) = 1/4 + O(c^2)
  return b / (T(2) * c) * std::tanh(c / T(2));
}

/// psi(x) for x > 0; recurrence to x >= 6 plus Bernoulli asymptotic series.
double digamma(double x);

/// log Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

double logsumexp(const Eigen::Ref<const Vec>& x);

/// Tempered logistic-softmax: p_k = sigma(f_k/tau) / sum_c sigma(f_c/tau),
/// evaluated in log space and renormalized by the exact sum.
Vec logistic_softmax(const Eigen::Ref<const Vec>& f, double tau);

/// Tempered softmax with max-subtraction.
Vec softmax_temp(const Eigen::Ref<const Vec>& f, double tau);

}  // namespace ccgp
