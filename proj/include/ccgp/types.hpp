#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ccgp {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IMat = Eigen::MatrixXi;
using Index = Eigen::Index;

/// Thrown when a task must be abandoned (e.g. the kernel matrix cannot be
/// factorized even after jitter escalation). Outer loops catch this and
/// count the episode as aborted.
class EpisodeAbort : public std::runtime_error {
 public:
  explicit EpisodeAbort(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccgp
