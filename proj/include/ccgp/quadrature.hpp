#pragma once

#include <vector>

#include "ccgp/kernels.hpp"
#include "ccgp/types.hpp"

namespace ccgp {

/// Physicists' Gauss-Hermite rule: integral of e^{-x^2} g(x) dx
/// approximated by sum w_i g(x_i). Nodes/weights from the Jacobi matrix
/// (Golub-Welsch), so no hard-coded tables.
struct GaussHermite {
  Vec nodes;
  Vec weights;
};

GaussHermite gauss_hermite(int n);

/// Dense tensor-product quadrature for the log evidence log p(y) of a tiny
/// task under the tempered logistic-softmax likelihood and the bundle's GP
/// prior. Cost is nodes^(N*C); meant for N*C <= 4.
double log_evidence_gh(const std::vector<int>& labels, int num_classes,
                       const GramBundle& bundle, double tau, int nodes);

}  // namespace ccgp
