#pragma once

#include "ccgp/rng.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// Exact draw from PG(b, c) for integer b >= 1, as the sum of b independent
/// PG(1, c) draws. PG(1, c) uses the alternating-series rejection sampler on
/// the exponentially tilted Jacobi density (truncation point t = 0.64).
double pg_sample(Rng& rng, int b, double c);

/// log density of PG(x | b, 0) for integer b >= 1 and x > 0, via the
/// alternating-series expansion truncated at `terms` terms. Only used by
/// density-ratio oracles; not a hot path.
double pg_log_density0(double x, int b, int terms = 200);

/// log density of the tilted PG(x | b, c):
///   cosh^b(c/2) * exp(-c^2 x / 2) * PG(x | b, 0).
double pg_log_density(double x, int b, double c, int terms = 200);

}  // namespace ccgp
