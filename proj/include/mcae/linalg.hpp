#ifndef MCAE_LINALG_HPP
#define MCAE_LINALG_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mcae {

// Dense double-precision storage. Eigen's column-major layout is the internal
// convention; all file I/O re-serializes explicitly in row-major order (see
// dataset.hpp), so the in-memory layout never leaks into artifacts.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Raised when a numerical routine fails (factorization breakdown, SVD
/// non-convergence, non-finite values where finiteness is required).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised on shape/argument misuse.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

bool all_finite(const Mat& a);
void require_finite(const Mat& a, const std::string& what);

/// Moore-Penrose pseudo-inverse via SVD. Singular values sigma_i with
/// sigma_i <= rtol * sigma_max are truncated to zero. A negative rtol selects
/// the default machine_epsilon * max(rows, cols).
Mat pinv(const Mat& a, double rtol = -1.0);

/// Default pseudo-inverse truncation tolerance for a given shape.
double pinv_default_rtol(Eigen::Index rows, Eigen::Index cols);

struct Centered {
  Vec mean;      // column mean x_bar = X 1 / n_t
  Mat centered;  // X - x_bar 1^T
};

/// Column mean and column-centered matrix. Requires at least one column.
Centered center(const Mat& x);

/// Solve A X = B for symmetric positive definite A via Cholesky.
/// Symmetry is checked to 1e-12 * max|A|; a non-SPD matrix raises
/// NumericError naming the failing pivot index.
Mat solve_spd(const Mat& a, const Mat& b);

}  // namespace mcae

#endif
