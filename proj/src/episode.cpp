#include "ccgp/episode.hpp"

#include <stdexcept>

namespace ccgp {

void validate_episode(const Episode& ep) {
  if (ep.num_classes < 2) throw std::invalid_argument("episode: need C >= 2");
  if (ep.support_X.rows() != static_cast<Index>(ep.support_y.size()) ||
      ep.query_X.rows() != static_cast<Index>(ep.query_y.size())) {
    throw std::invalid_argument("episode: label/input row count mismatch");
  }
  std::vector<int> counts(ep.num_classes, 0);
  for (int y : ep.support_y) {
    if (y < 0 || y >= ep.num_classes) throw std::invalid_argument("episode: support label out of range");
    ++counts[y];
  }
  for (int y : ep.query_y) {
    if (y < 0 || y >= ep.num_classes) throw std::invalid_argument("episode: query label out of range");
  }
  const int shots = counts.empty() ? 0 : counts[0];
  for (int c : counts) {
    if (c == 0) throw std::invalid_argument("episode: class missing from support");
    if (c != shots) throw std::invalid_argument("episode: support is not K-shot balanced");
  }
}

Mat one_hot(const std::vector<int>& labels, int num_classes) {
  Mat Y = Mat::Zero(static_cast<Index>(labels.size()), num_classes);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= num_classes) {
      throw std::invalid_argument("one_hot: label out of range");
    }
    Y(static_cast<Index>(n), labels[n]) = 1.0;
  }
  return Y;
}

Mat combined_inputs(const Episode& ep) {
  Mat X(ep.support_X.rows() + ep.query_X.rows(), ep.support_X.cols());
  X.topRows(ep.support_X.rows()) = ep.support_X;
  X.bottomRows(ep.query_X.rows()) = ep.query_X;
  return X;
}

std::vector<int> combined_labels(const Episode& ep) {
  std::vector<int> y = ep.support_y;
  y.insert(y.end(), ep.query_y.begin(), ep.query_y.end());
  return y;
}

}  // namespace ccgp
