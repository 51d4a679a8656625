#ifndef MCAE_LINEAR_ANALYSIS_HPP
#define MCAE_LINEAR_ANALYSIS_HPP

#include <optional>
#include <string>

#include "mcae/linalg.hpp"

namespace mcae {

enum class Approach {
  npop,
  nopo,
  mcpop,
  mcopo,
  mcopo_full,
  taen,
  taen_full,
};

Approach approach_from_string(const std::string& name);
std::string approach_name(Approach a);
bool approach_is_full(Approach a);
/// Approaches whose training randomizes observations each epoch.
bool approach_randomizes(Approach a);

/// y = W x + b; the unit of all closed-form analysis.
struct AffineMap {
  Mat W;
  Vec b;

  Vec operator()(const Vec& x) const { return W * x + b; }
  Mat operator()(const Mat& x) const { return (W * x).colwise() + b; }
  Eigen::Index in_dim() const { return W.cols(); }
  Eigen::Index out_dim() const { return W.rows(); }
};

/// Linear problem instance: PtO map GB (m x n), optional full map G (p x n)
/// whose selected rows equal GB, paired data U (n x n_t), Y (m x n_t),
/// prior mean u0 and regularization weight lambda.
struct LinearProblem {
  Mat GB;
  std::optional<Mat> G_full;
  Mat U;
  Mat Y;
  Vec u0;
  double lambda = 0.0;

  Eigen::Index n() const { return GB.cols(); }
  Eigen::Index m() const { return GB.rows(); }
  Eigen::Index n_t() const { return U.cols(); }
  void validate() const;
};

struct EncDec {
  AffineMap enc;
  AffineMap dec;
};

// Closed-form sequential optima. Encoder/decoder roles per approach:
//   npop, mcpop : enc = PtO surrogate (u -> y), dec = inverse (y -> u)
//   nopo, mcopo, taen : enc = inverse (y -> u), dec = PtO (u -> y)
//   *_full variants : dec maps u -> full state (requires G_full)
EncDec fit_npop(const LinearProblem& p);
EncDec fit_nopo(const LinearProblem& p);
EncDec fit_mcpop(const LinearProblem& p);
EncDec fit_mcopo(const LinearProblem& p, bool full = false);
EncDec fit_taen(const LinearProblem& p, bool full = false);
EncDec fit(Approach a, const LinearProblem& p);

/// Analytic test-error predictions, evaluated at a noise-free test pair
/// (y_test = GB u_test). inverse_sq / forward_sq are squared 2-norm errors of
/// the inverse and PtO surrogates; taen_bound carries ||u0 - u_test||^2 for
/// the TAEN rows.
struct ErrorPrediction {
  double inverse_sq = 0.0;
  double forward_sq = 0.0;
  std::optional<double> taen_bound;
};
ErrorPrediction predict_test_errors(Approach a, const LinearProblem& p,
                                    const Vec& u_test, const Vec& y_test);

/// Frobenius norms of the gradient blocks of the simultaneous training loss
///   1/2 ||enc(X) - T||^2 + beta/2 ||dec(enc(X)) - X_rec||^2
/// at (enc, dec), where (X, T, X_rec) = (U, Y, U) for the PtO-inverse layout
/// and (Y, U, Y) for the inverse-PtO layout, plus the coupling identity
/// residual ||We C C^T - We Wd We C C^T||_F with C the centered input.
struct ResidualBundle {
  double grad_We = 0.0;
  double grad_be = 0.0;
  double grad_Wd = 0.0;
  double grad_bd = 0.0;
  double coupling = 0.0;
  double scale = 1.0;  // 1 + data magnitude, for relative thresholds

  double max_relative() const;
};
ResidualBundle simultaneous_residual(const AffineMap& enc, const AffineMap& dec,
                                     const LinearProblem& p, double beta,
                                     bool inverse_pto_layout = false);

/// Gradient blocks of the sequential phase losses at (enc, dec); all zero at
/// the corresponding fit_* optimum. Used by the stationarity suite.
struct PhaseGradients {
  Mat dWe;
  Vec dbe;
  Mat dWd;
  Vec dbd;
  double scale = 1.0;

  double max_relative() const;
};
PhaseGradients sequential_loss_gradients(Approach a, const LinearProblem& p,
                                         const EncDec& maps);

}  // namespace mcae

#endif
