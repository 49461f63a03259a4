#include "ccgp/polya_gamma.hpp"

#include <cmath>
#include <stdexcept>

#include "ccgp/math.hpp"

namespace ccgp {

namespace {

constexpr double kTrunc = 0.64;  // 2/pi, the series crossover point
constexpr double kPiSq = M_PI * M_PI;

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Coefficients a_n(x) of the Jacobi J*(1, 0) density series; the left
// (x <= t) and right (x > t) expansions agree at the crossover.
double series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x <= kTrunc) {
    return M_PI * h * std::pow(2.0 / (M_PI * x), 1.5) *
           std::exp(-2.0 * h * h / x);
  }
  return M_PI * h * std::exp(-h * h * kPiSq * x / 2.0);
}

// P(IG(mu = 1/z, lambda = 1) <= t), parameterized by z so z = 0 is the
// one-sided-stable limit.
double inv_gauss_cdf_t(double z) {
  const double rt = 1.0 / std::sqrt(kTrunc);
  const double a = normal_cdf(rt * (kTrunc * z - 1.0));
  const double b = std::exp(2.0 * z) * normal_cdf(-rt * (kTrunc * z + 1.0));
  return a + b;
}

// IG(mu = 1/z, lambda = 1) truncated to (0, t].
double sample_trunc_inv_gauss(Rng& rng, double z) {
  if (z < 1.0 / kTrunc) {
    // mu > t: propose from the stable-like tail and thin by the tilt
    for (;;) {
      double e1, e2;
      do {
        e1 = draw_exponential(rng);
        e2 = draw_exponential(rng);
      } while (e1 * e1 > 2.0 * e2 / kTrunc);
      const double x = kTrunc / ((1.0 + kTrunc * e1) * (1.0 + kTrunc * e1));
      if (draw_uniform(rng) <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  // mu <= t: standard IG transform, reject draws beyond t
  const double mu = 1.0 / z;
  for (;;) {
    const double n = draw_normal(rng);
    const double y = n * n;
    double x = mu + 0.5 * mu * mu * y -
               0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    if (draw_uniform(rng) > mu / (mu + x)) x = mu * mu / x;
    if (x <= kTrunc) return x;
  }
}

// One draw of J*(1, z); PG(1, c) = J*(1, |c|/2) / 4.
double sample_jacobi_tilted(Rng& rng, double z) {
  const double big_k = kPiSq / 8.0 + z * z / 2.0;
  const double p = M_PI / (2.0 * big_k) * std::exp(-big_k * kTrunc);
  const double q = 2.0 * std::exp(-z) * inv_gauss_cdf_t(z);
  const double right_prob = p / (p + q);
  for (;;) {
    double x;
    if (draw_uniform(rng) < right_prob) {
      x = kTrunc + draw_exponential(rng) / big_k;  // exponential right tail
    } else {
      x = sample_trunc_inv_gauss(rng, z);
    }
    // Alternating partial sums: accept as soon as U*a_0 drops below an odd
    // partial sum, reject when it exceeds an even one.
    double s = series_coef(0, x);
    const double y = draw_uniform(rng) * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

}  // namespace

double pg_sample(Rng& rng, int b, double c) {
  if (b < 1) throw std::invalid_argument("pg_sample: requires b >= 1");
  const double z = std::abs(c) / 2.0;
  double acc = 0.0;
  for (int i = 0; i < b; ++i) acc += sample_jacobi_tilted(rng, z) / 4.0;
  return acc;
}

double pg_log_density0(double x, int b, int terms) {
  if (b < 1) throw std::invalid_argument("pg_log_density0: requires b >= 1");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  // PG(x|b,0) = 2^{b-1}/Gamma(b) * sum_k (-1)^k Gamma(k+b)/Gamma(k+1)
  //             * (2k+b)/sqrt(2 pi x^3) * exp(-(2k+b)^2/(8x))
  const double lead = (b - 1) * std::log(2.0) - log_gamma(b) -
                      0.5 * std::log(2.0 * M_PI * x * x * x);
  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    const double w = 2.0 * k + b;
    double t = std::exp(log_gamma(k + b) - log_gamma(k + 1.0) -
                        w * w / (8.0 * x)) * w;
    sum += (k % 2 == 0) ? t : -t;
    if (std::abs(t) < 1e-300) break;
  }
  if (!(sum > 0.0)) return -std::numeric_limits<double>::infinity();
  return lead + std::log(sum);
}

double pg_log_density(double x, int b, double c, int terms) {
  return b * log_cosh(c / 2.0) - c * c * x / 2.0 + pg_log_density0(x, b, terms);
}

}  // namespace ccgp
