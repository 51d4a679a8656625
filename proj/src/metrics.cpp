#include "mcae/metrics.hpp"

namespace mcae {

Vec metric_rel_per_sample(const Mat& pred, const Mat& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw MetricError("metric_rel: shape mismatch");
  }
  if (truth.cols() == 0) throw MetricError("metric_rel: no samples");
  Vec out(truth.cols());
  for (Eigen::Index i = 0; i < truth.cols(); ++i) {
    const double denom = truth.col(i).squaredNorm();
    if (denom == 0.0) {
      throw MetricError("metric_rel: zero-norm truth column " +
                        std::to_string(i));
    }
    out(i) = (pred.col(i) - truth.col(i)).squaredNorm() / denom;
  }
  return out;
}

double metric_rel(const Mat& pred, const Mat& truth) {
  return metric_rel_per_sample(pred, truth).mean();
}

Vec metric_abs_pointwise(const Mat& pred, const Mat& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw MetricError("metric_abs_pointwise: shape mismatch");
  }
  if (truth.cols() == 0) throw MetricError("metric_abs_pointwise: no samples");
  return (pred - truth).cwiseAbs().rowwise().mean();
}

}  // namespace mcae
