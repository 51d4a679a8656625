#include "mcae/linalg.hpp"

#include <Eigen/SVD>
#include <limits>

namespace mcae {

bool all_finite(const Mat& a) { return a.allFinite(); }

void require_finite(const Mat& a, const std::string& what) {
  if (!a.allFinite()) {
    throw NumericError(what + ": non-finite entries");
  }
}

double pinv_default_rtol(Eigen::Index rows, Eigen::Index cols) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols));
}

Mat pinv(const Mat& a, double rtol) {
  require_finite(a, "pinv");
  if (a.rows() == 0 || a.cols() == 0) {
    return Mat::Zero(a.cols(), a.rows());
  }
  if (rtol < 0.0) rtol = pinv_default_rtol(a.rows(), a.cols());

  // Jacobi is the more accurate kernel; switch to the divide-and-conquer
  // solver once both dimensions are large.
  Mat u, v;
  Vec s;
  if (std::min(a.rows(), a.cols()) > 32) {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw NumericError("pinv: SVD failed to converge (BDCSVD), size " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
    }
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw NumericError("pinv: SVD failed to converge (JacobiSVD), size " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
    }
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }

  const double cutoff = rtol * (s.size() > 0 ? s(0) : 0.0);
  Vec sinv = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) sinv(i) = 1.0 / s(i);
  }
  return v * sinv.asDiagonal() * u.transpose();
}

Centered center(const Mat& x) {
  if (x.cols() < 1) {
    throw DimensionError("center: matrix has zero columns");
  }
  Centered c;
  c.mean = x.rowwise().mean();
  c.centered = x.colwise() - c.mean;
  return c;
}

namespace {

// Locates the first non-positive pivot of a failed Cholesky factorization.
Eigen::Index failing_pivot(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return j;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) =
          (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return n;  // not reached for genuinely failed factorizations
}

}  // namespace

Mat solve_spd(const Mat& a, const Mat& b) {
  require_finite(a, "solve_spd(A)");
  require_finite(b, "solve_spd(B)");
  if (a.rows() != a.cols()) {
    throw DimensionError("solve_spd: A must be square");
  }
  if (a.rows() != b.rows()) {
    throw DimensionError("solve_spd: A and B row counts differ");
  }
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    throw NumericError("solve_spd: matrix not symmetric (asymmetry " +
                       std::to_string(asym) + ")");
  }
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError("solve_spd: matrix not positive definite at pivot " +
                       std::to_string(failing_pivot(a)));
  }
  return llt.solve(b);
}

}  // namespace mcae
