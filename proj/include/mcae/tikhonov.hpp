#ifndef MCAE_TIKHONOV_HPP
#define MCAE_TIKHONOV_HPP

#include "mcae/forward_model.hpp"

namespace mcae {

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& msg, Vec last_iterate)
      : std::runtime_error(msg), last_iterate_(std::move(last_iterate)) {}
  const Vec& last_iterate() const { return last_iterate_; }

private:
  Vec last_iterate_;
};

struct TikOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;
  int memory = 10;          // L-BFGS pair count
  double wolfe_c1 = 1e-4;   // sufficient decrease
  double wolfe_c2 = 0.9;    // curvature
};

struct TikResult {
  Vec u;
  int iters = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// Minimizes 1/2 ||u - u0||^2 + lambda/2 ||B o G(u) - y||^2 by L-BFGS with a
/// strong-Wolfe line search, starting from u0. Gradients come from the
/// model's adjoint. Line-search breakdown falls back to a memory reset and
/// a backtracking steepest-descent step; if that also fails, SolverError
/// carries the last iterate.
TikResult tikhonov_solve(const ForwardModel& fm, const Vec& y, const Vec& u0,
                         double lambda, const TikOptions& opts = {});

}  // namespace mcae

#endif
