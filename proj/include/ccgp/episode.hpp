#pragma once

#include <vector>

#include "ccgp/types.hpp"

namespace ccgp {

/// One few-shot task: N-way K-shot support plus a query set. Labels are
/// 0-based class indices in [0, num_classes).
struct Episode {
  Mat support_X;
  std::vector<int> support_y;
  Mat query_X;
  std::vector<int> query_y;
  int num_classes = 0;
};

/// Checks label ranges, the every-class-in-support rule, and L = C*K.
void validate_episode(const Episode& ep);

Mat one_hot(const std::vector<int>& labels, int num_classes);

/// Support and query stacked (support rows first), as used by the
/// marginal-likelihood loss.
Mat combined_inputs(const Episode& ep);
std::vector<int> combined_labels(const Episode& ep);

}  // namespace ccgp
