#ifndef MCAE_NAVIER_STOKES_HPP
#define MCAE_NAVIER_STOKES_HPP

#include <atomic>
#include <memory>
#include <optional>
#include <vector>

#include "mcae/forward_model.hpp"
#include "mcae/spectral.hpp"

namespace mcae {

// 2D incompressible Navier-Stokes in vorticity form on the periodic unit
// square, stream-function formulation, pseudospectral in space:
//   dw/dt + v . grad(w) = nu Lap(w) + f,   -Lap(psi) = w,
//   v = (d psi/dx2, -d psi/dx1).
// Time stepping: Crank-Nicolson diffusion in Fourier space, Heun for the
// advection + forcing terms, 2/3-rule dealiasing on the nonlinear product.
// The parameter is the initial vorticity; the state is vorticity at t = T.
// vjp runs the exact discrete adjoint backward over stored states
// (recursive checkpointing once the step count exceeds the storage limit).

struct NSOptions {
  bool advection = true;
  bool forcing = true;
  std::optional<Vec> custom_forcing;  // overrides the standard forcing
  int store_limit = 256;              // full trajectory below this step count
};

class NSModel final : public ForwardModel {
public:
  NSModel(int n, double nu, double dt, int steps, std::vector<int> obs_indices,
          NSOptions options = {});
  ~NSModel() override;

  int param_dim() const override { return n_ * n_; }
  int state_dim() const override { return n_ * n_; }

  Vec apply(const Vec& u0) const override;
  Vec vjp(const Vec& u0, const Vec& cot_state) const override;

  int grid() const { return n_; }
  double nu() const { return nu_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  const Vec& forcing() const { return forcing_; }

  /// Stability warnings recorded across apply() calls (max|v| dt / h > 1).
  long cfl_violations() const { return cfl_violations_.load(); }

  /// Velocity field recovered from a vorticity field (test hook).
  std::pair<Vec, Vec> velocity(const Vec& vorticity) const;

  /// Spectral divergence i k . v_hat of the recovered velocity (test hook).
  double max_spectral_divergence(const Vec& vorticity) const;

private:
  struct Work;  // per-call spectral workspace

  CVec advect_hat(const CVec& what, Work& w, double* max_speed) const;
  void advect_adjoint(const CVec& what_point, const CVec& cot, CVec& accum,
                      Work& w) const;
  void step_forward(const CVec& what, CVec& inter, CVec& next, Work& w) const;
  void step_adjoint(const CVec& what, CVec& cot, Work& w) const;
  void vjp_segment(CVec what, int nsteps, CVec& cot, Work& w) const;

  int n_;
  double nu_, dt_;
  int steps_;
  NSOptions options_;
  Vec forcing_;
  std::unique_ptr<Fft2> fft_;

  // Per-mode constants, flat spectral index s = jy * n + ix.
  std::vector<double> k2_, mask_, eplus_, eminus_, invk2_;
  std::vector<Cplx> ikx_, iky_;
  CVec forcing_hat_;

  mutable std::atomic<long> cfl_violations_{0};
};

}  // namespace mcae

#endif
