#include "mcae/tikhonov.hpp"

#include <cmath>
#include <deque>

namespace mcae {

namespace {

struct Objective {
  const ForwardModel& fm;
  const Vec& y;
  const Vec& u0;
  double lambda;

  double eval(const Vec& u, Vec& grad) const {
    const Vec du = u - u0;
    if (lambda == 0.0) {
      grad = du;
      return 0.5 * du.squaredNorm();
    }
    const Vec misfit = fm.apply_observed(u) - y;
    grad = du + lambda * fm.vjp_observed(u, misfit);
    return 0.5 * du.squaredNorm() + 0.5 * lambda * misfit.squaredNorm();
  }
};

struct LinePoint {
  double alpha;
  double phi;
  double dphi;
};

// Strong Wolfe line search (bracket + zoom). Returns true on success and
// leaves (u_new, phi_new, g_new) at the accepted point.
bool wolfe_search(const Objective& obj, const Vec& u, const Vec& d,
                  double phi0, double dphi0, double c1, double c2, Vec& u_new,
                  double& phi_new, Vec& g_new) {
  const double alpha_max = 1e4;
  LinePoint prev{0.0, phi0, dphi0};
  double alpha = 1.0;
  Vec g(u.size());

  auto probe = [&](double a, LinePoint& p) {
    u_new = u + a * d;
    phi_new = obj.eval(u_new, g);
    p = {a, phi_new, g.dot(d)};
  };

  auto zoom = [&](LinePoint lo, LinePoint hi) -> bool {
    for (int i = 0; i < 50; ++i) {
      // Quadratic interpolation with a bisection safeguard.
      double a = lo.alpha -
                 0.5 * lo.dphi * (hi.alpha - lo.alpha) * (hi.alpha - lo.alpha) /
                     (hi.phi - lo.phi - lo.dphi * (hi.alpha - lo.alpha));
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      if (!std::isfinite(a) || a <= left + 0.1 * (right - left) ||
          a >= right - 0.1 * (right - left)) {
        a = 0.5 * (lo.alpha + hi.alpha);
      }
      LinePoint p;
      probe(a, p);
      if (p.phi > phi0 + c1 * p.alpha * dphi0 || p.phi >= lo.phi) {
        hi = p;
      } else {
        if (std::abs(p.dphi) <= -c2 * dphi0) {
          g_new = g;
          return true;
        }
        if (p.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = p;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, lo.alpha)) {
        break;
      }
    }
    // Accept the best sufficient-decrease point found, if any.
    if (lo.alpha > 0.0 && lo.phi <= phi0 + c1 * lo.alpha * dphi0) {
      probe(lo.alpha, lo);
      g_new = g;
      return true;
    }
    return false;
  };

  for (int i = 0; i < 30; ++i) {
    LinePoint p;
    probe(alpha, p);
    if (p.phi > phi0 + c1 * alpha * dphi0 || (i > 0 && p.phi >= prev.phi)) {
      return zoom(prev, p);
    }
    if (std::abs(p.dphi) <= -c2 * dphi0) {
      g_new = g;
      return true;
    }
    if (p.dphi >= 0.0) {
      return zoom(p, prev);
    }
    prev = p;
    alpha = std::min(2.0 * alpha, alpha_max);
    if (alpha >= alpha_max) return false;
  }
  return false;
}

}  // namespace

TikResult tikhonov_solve(const ForwardModel& fm, const Vec& y, const Vec& u0,
                         double lambda, const TikOptions& opts) {
  if (y.size() != fm.obs_dim()) {
    throw DimensionError("tikhonov_solve: observation dimension mismatch");
  }
  if (u0.size() != fm.param_dim()) {
    throw DimensionError("tikhonov_solve: start point dimension mismatch");
  }
  if (lambda < 0.0) throw DimensionError("tikhonov_solve: negative lambda");

  Objective obj{fm, y, u0, lambda};
  TikResult res;
  res.u = u0;
  Vec g(u0.size());
  double phi = obj.eval(res.u, g);

  std::deque<std::pair<Vec, Vec>> pairs;  // (s, y) history
  Vec u_new(u0.size()), g_new(u0.size());
  double phi_new = 0.0;

  for (res.iters = 0; res.iters < opts.max_iters; ++res.iters) {
    res.grad_norm = g.norm();
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alphas(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      const auto& [s, yv] = pairs[i];
      alphas[i] = s.dot(q) / yv.dot(s);
      q -= alphas[i] * yv;
    }
    if (!pairs.empty()) {
      const auto& [s, yv] = pairs.back();
      q *= s.dot(yv) / yv.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, yv] = pairs[i];
      q += (alphas[i] - yv.dot(q) / yv.dot(s)) * s;
    }
    Vec d = -q;

    double dphi0 = g.dot(d);
    if (dphi0 >= 0.0) {  // not a descent direction: drop the memory
      pairs.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }

    bool ok = wolfe_search(obj, res.u, d, phi, dphi0, opts.wolfe_c1,
                           opts.wolfe_c2, u_new, phi_new, g_new);
    if (!ok && !pairs.empty()) {
      pairs.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
      ok = wolfe_search(obj, res.u, d, phi, dphi0, opts.wolfe_c1,
                        opts.wolfe_c2, u_new, phi_new, g_new);
    }
    if (!ok) {
      // Last resort: plain backtracking on the steepest descent direction.
      d = -g;
      dphi0 = -g.squaredNorm();
      double alpha = 1.0;
      bool accepted = false;
      for (int k = 0; k < 60; ++k, alpha *= 0.5) {
        u_new = res.u + alpha * d;
        phi_new = obj.eval(u_new, g_new);
        if (phi_new <= phi + opts.wolfe_c1 * alpha * dphi0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw SolverError("tikhonov_solve: line search failed at iteration " +
                              std::to_string(res.iters) + " (grad norm " +
                              std::to_string(res.grad_norm) + ")",
                          res.u);
      }
    }

    Vec s = u_new - res.u;
    Vec yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      pairs.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }
    res.u = u_new;
    g = g_new;
    phi = phi_new;
  }

  res.grad_norm = g.norm();
  res.objective = phi;
  if (res.grad_norm <= opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace mcae
