#include "ccgp/math.hpp"

#include <stdexcept>

namespace ccgp {

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: requires x > 0");
  double acc = 0.0;
  while (x < 6.0) {  // psi(x) = psi(x+1) - 1/x
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ log x - 1/(2x) - sum_k B_{2k} / (2k x^{2k}), 7 terms
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  static const double coef[7] = {
      1.0 / 12.0,    -1.0 / 120.0,   1.0 / 252.0,  -1.0 / 240.0,
      1.0 / 132.0,   -691.0 / 32760.0, 1.0 / 12.0};
  double p = inv2;
  for (int k = 0; k < 7; ++k) {
    series += coef[k] * p;
    p *= inv2;
  }
  return acc + std::log(x) - 0.5 * inv - series;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
  // Lanczos approximation, g = 7, 9 coefficients
  static const double g = 7.0;
  static const double c[9] = {
      0.99999999999980993,     676.5203681218851,    -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = c[0];
  for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double logsumexp(const Eigen::Ref<const Vec>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

namespace {

void check_logits(const Eigen::Ref<const Vec>& f, double tau) {
  if (f.size() < 2) throw std::invalid_argument("likelihood: need C >= 2 logits");
  if (!(tau > 0.0)) throw std::invalid_argument("likelihood: tau must be > 0");
  if (!f.allFinite()) throw std::invalid_argument("likelihood: non-finite logit");
}

}  // namespace

Vec logistic_softmax(const Eigen::Ref<const Vec>& f, double tau) {
  check_logits(f, tau);
  Vec lp(f.size());
  for (Index k = 0; k < f.size(); ++k) lp[k] = log_sigmoid(f[k] / tau);
  const double lse = logsumexp(lp);
  Vec p = (lp.array() - lse).exp();
  p /= p.sum();
  return p;
}

Vec softmax_temp(const Eigen::Ref<const Vec>& f, double tau) {
  check_logits(f, tau);
  Vec s = f / tau;
  Vec p = (s.array() - s.maxCoeff()).exp();
  p /= p.sum();
  return p;
}

}  // namespace ccgp
