#ifndef MCAE_METRICS_HPP
#define MCAE_METRICS_HPP

#include "mcae/linalg.hpp"

namespace mcae {

class MetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Average relative squared Euclidean error over columns:
/// mean_i ||pred_i - truth_i||^2 / ||truth_i||^2.
double metric_rel(const Mat& pred, const Mat& truth);

/// Per-sample relative squared errors (column-wise).
Vec metric_rel_per_sample(const Mat& pred, const Mat& truth);

/// Componentwise mean of |pred - truth| over samples.
Vec metric_abs_pointwise(const Mat& pred, const Mat& truth);

}  // namespace mcae

#endif
