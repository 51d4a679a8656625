#include "mcae/navier_stokes.hpp"

#include <cmath>

namespace mcae {

struct NSModel::Work {
  CVec a, b, c, d;  // spectral scratch
  Vec v1, v2, wx, wy, prod;
  explicit Work(int n)
      : a(std::size_t(n) * n),
        b(std::size_t(n) * n),
        c(std::size_t(n) * n),
        d(std::size_t(n) * n),
        v1(n * n),
        v2(n * n),
        wx(n * n),
        wy(n * n),
        prod(n * n) {}
};

namespace {

void cmul(const std::vector<double>& m, CVec& x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= m[i];
}

}  // namespace

NSModel::NSModel(int n, double nu, double dt, int steps,
                 std::vector<int> obs_indices, NSOptions options)
    : n_(n), nu_(nu), dt_(dt), steps_(steps), options_(std::move(options)) {
  if (n < 4 || n % 2 != 0) {
    throw DimensionError("NSModel: grid extent must be even and >= 4");
  }
  if (steps < 1 || dt <= 0.0) {
    throw DimensionError("NSModel: invalid time discretization");
  }
  fft_ = std::make_unique<Fft2>(n_);

  const std::size_t total = std::size_t(n_) * n_;
  k2_.resize(total);
  mask_.resize(total);
  eplus_.resize(total);
  eminus_.resize(total);
  invk2_.resize(total);
  ikx_.resize(total);
  iky_.resize(total);
  const int cutoff = n_ / 3;  // 2/3 rule on integer frequencies
  for (int j = 0; j < n_; ++j) {
    const int fy = fft_freq(j, n_);
    for (int i = 0; i < n_; ++i) {
      const int fx = fft_freq(i, n_);
      const std::size_t s = std::size_t(j) * n_ + i;
      const double kx = 2.0 * M_PI * fx;
      const double ky = 2.0 * M_PI * fy;
      k2_[s] = kx * kx + ky * ky;
      invk2_[s] = k2_[s] > 0.0 ? 1.0 / k2_[s] : 0.0;
      // Nyquist derivative multipliers are zeroed so spectral derivatives of
      // real fields stay conjugate-symmetric (the usual even-grid convention).
      ikx_[s] = Cplx(0.0, fx == -n_ / 2 ? 0.0 : kx);
      iky_[s] = Cplx(0.0, fy == -n_ / 2 ? 0.0 : ky);
      mask_[s] = (std::abs(fx) <= cutoff && std::abs(fy) <= cutoff) ? 1.0 : 0.0;
      const double a = 0.5 * dt_ * nu_ * k2_[s];
      eplus_[s] = 1.0 / (1.0 + a);
      eminus_[s] = 1.0 - a;
    }
  }

  forcing_ = Vec::Zero(n_ * n_);
  if (options_.forcing) {
    if (options_.custom_forcing) {
      if (options_.custom_forcing->size() != n_ * n_) {
        throw DimensionError("NSModel: custom forcing size mismatch");
      }
      forcing_ = *options_.custom_forcing;
    } else {
      for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
          const double x1 = double(i) / n_;
          const double x2 = double(j) / n_;
          forcing_(j * n_ + i) = 0.1 * (std::sin(2.0 * M_PI * (x1 + x2)) +
                                        std::cos(2.0 * M_PI * (x1 + x2)));
        }
      }
    }
  }
  forcing_hat_ = spectrum_of(*fft_, forcing_);

  set_obs_indices(std::move(obs_indices));
}

NSModel::~NSModel() = default;

// A(w) = -dealias(v . grad w) in spectral space. The velocity and vorticity
// gradients enter physically; only the product spectrum is masked.
CVec NSModel::advect_hat(const CVec& what, Work& w, double* max_speed) const {
  const std::size_t total = what.size();
  for (std::size_t s = 0; s < total; ++s) {
    const Cplx psi = invk2_[s] * what[s];
    w.a[s] = iky_[s] * psi;    // v1_hat
    w.b[s] = -ikx_[s] * psi;   // v2_hat
    w.c[s] = ikx_[s] * what[s];
    w.d[s] = iky_[s] * what[s];
  }
  w.v1 = field_of(*fft_, w.a);
  w.v2 = field_of(*fft_, w.b);
  w.wx = field_of(*fft_, w.c);
  w.wy = field_of(*fft_, w.d);
  if (max_speed) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < w.v1.size(); ++i) {
      m = std::max(m, std::max(std::abs(w.v1(i)), std::abs(w.v2(i))));
    }
    *max_speed = m;
  }
  w.prod = w.v1.cwiseProduct(w.wx) + w.v2.cwiseProduct(w.wy);
  CVec out = spectrum_of(*fft_, w.prod);
  for (std::size_t s = 0; s < total; ++s) out[s] *= -mask_[s];
  return out;
}

void NSModel::step_forward(const CVec& what, CVec& inter, CVec& next,
                           Work& w) const {
  const std::size_t total = what.size();
  double speed = 0.0;
  CVec a0 = options_.advection ? advect_hat(what, w, &speed)
                               : CVec(total, Cplx(0.0, 0.0));
  if (speed * dt_ * n_ > 1.0) cfl_violations_.fetch_add(1);
  for (std::size_t s = 0; s < total; ++s) a0[s] += forcing_hat_[s];

  inter.resize(total);
  for (std::size_t s = 0; s < total; ++s) {
    inter[s] = eplus_[s] * (eminus_[s] * what[s] + dt_ * a0[s]);
  }

  CVec a1 = options_.advection ? advect_hat(inter, w, nullptr)
                               : CVec(total, Cplx(0.0, 0.0));
  next.resize(total);
  for (std::size_t s = 0; s < total; ++s) {
    a1[s] += forcing_hat_[s];
    next[s] = eplus_[s] * (eminus_[s] * what[s] +
                           0.5 * dt_ * (a0[s] + a1[s]));
  }
}

Vec NSModel::apply(const Vec& u0) const {
  if (u0.size() != param_dim()) {
    throw DimensionError("NSModel::apply: parameter dimension mismatch");
  }
  require_finite(u0, "NSModel::apply");
  Work w(n_);
  CVec what = spectrum_of(*fft_, u0);
  CVec inter, next;
  for (int t = 0; t < steps_; ++t) {
    step_forward(what, inter, next, w);
    what.swap(next);
  }
  return field_of(*fft_, std::move(what));
}

// Adjoint of the linearization of advect_hat at what_point, applied to the
// spectral cotangent cot; the result is accumulated into accum. Realness of
// the underlying fields makes every diagonal multiplier adjoint its
// conjugate, and the FFT boundary adjoints are n^2 * Re(ifft) and fft / n^2.
void NSModel::advect_adjoint(const CVec& what_point, const CVec& cot,
                             CVec& accum, Work& w) const {
  const std::size_t total = what_point.size();
  const double n2 = double(n_) * n_;

  // Recompute the linearization-point physical factors.
  for (std::size_t s = 0; s < total; ++s) {
    const Cplx psi = invk2_[s] * what_point[s];
    w.a[s] = iky_[s] * psi;
    w.b[s] = -ikx_[s] * psi;
    w.c[s] = ikx_[s] * what_point[s];
    w.d[s] = iky_[s] * what_point[s];
  }
  w.v1 = field_of(*fft_, w.a);
  w.v2 = field_of(*fft_, w.b);
  w.wx = field_of(*fft_, w.c);
  w.wy = field_of(*fft_, w.d);

  // Through the product spectrum: cot_prod = n^2 Re(ifft(-mask .* cot)).
  for (std::size_t s = 0; s < total; ++s) w.c[s] = -mask_[s] * cot[s];
  Vec cot_prod = field_of(*fft_, w.c);
  cot_prod *= n2;

  // Factor cotangents, then back through Re(ifft) (adjoint fft/n^2).
  w.prod = cot_prod.cwiseProduct(w.wx);
  CVec cv1 = spectrum_of(*fft_, w.prod);
  w.prod = cot_prod.cwiseProduct(w.wy);
  CVec cv2 = spectrum_of(*fft_, w.prod);
  w.prod = cot_prod.cwiseProduct(w.v1);
  CVec cwx = spectrum_of(*fft_, w.prod);
  w.prod = cot_prod.cwiseProduct(w.v2);
  CVec cwy = spectrum_of(*fft_, w.prod);

  for (std::size_t s = 0; s < total; ++s) {
    const Cplx cpsi = -iky_[s] * cv1[s] + ikx_[s] * cv2[s];
    accum[s] += (invk2_[s] * cpsi - ikx_[s] * cwx[s] - iky_[s] * cwy[s]) / n2;
  }
}

// Reverse one step: cot arrives as the cotangent of w^{n+1} and leaves as
// the cotangent of w^n. Requires the stored state w^n (inter is recomputed).
void NSModel::step_adjoint(const CVec& what, CVec& cot, Work& w) const {
  const std::size_t total = what.size();
  CVec inter, next;
  step_forward(what, inter, next, w);

  CVec g(total);
  for (std::size_t s = 0; s < total; ++s) g[s] = eplus_[s] * cot[s];

  CVec c1(total, Cplx(0.0, 0.0));
  if (options_.advection) {
    advect_adjoint(inter, g, c1, w);
    for (std::size_t s = 0; s < total; ++s) c1[s] *= 0.5 * dt_;
  }

  CVec g1(total);
  for (std::size_t s = 0; s < total; ++s) g1[s] = eplus_[s] * c1[s];

  CVec cn(total);
  for (std::size_t s = 0; s < total; ++s) {
    cn[s] = eminus_[s] * (g[s] + g1[s]);
  }
  if (options_.advection) {
    CVec probe(total);
    for (std::size_t s = 0; s < total; ++s) {
      probe[s] = 0.5 * dt_ * g[s] + dt_ * g1[s];
    }
    advect_adjoint(what, probe, cn, w);
  }
  cot.swap(cn);
}

// Reverse nsteps of the recursion starting from state what. Stores the full
// sub-trajectory when it fits, otherwise bisects and recomputes.
void NSModel::vjp_segment(CVec what, int nsteps, CVec& cot, Work& w) const {
  if (nsteps <= options_.store_limit) {
    std::vector<CVec> traj;
    traj.reserve(nsteps);
    CVec inter, next;
    for (int t = 0; t < nsteps; ++t) {
      traj.push_back(what);
      step_forward(what, inter, next, w);
      what.swap(next);
    }
    for (int t = nsteps - 1; t >= 0; --t) {
      step_adjoint(traj[t], cot, w);
    }
    return;
  }
  const int half = nsteps / 2;
  CVec mid = what;
  CVec inter, next;
  for (int t = 0; t < half; ++t) {
    step_forward(mid, inter, next, w);
    mid.swap(next);
  }
  vjp_segment(std::move(mid), nsteps - half, cot, w);
  vjp_segment(std::move(what), half, cot, w);
}

Vec NSModel::vjp(const Vec& u0, const Vec& cot_state) const {
  if (u0.size() != param_dim() || cot_state.size() != state_dim()) {
    throw DimensionError("NSModel::vjp: dimension mismatch");
  }
  Work w(n_);
  const double n2 = double(n_) * n_;

  // Exit boundary: w_T = Re(ifft(what_T)) has adjoint fft / n^2.
  CVec cot = spectrum_of(*fft_, cot_state);
  for (std::size_t s = 0; s < cot.size(); ++s) cot[s] /= n2;

  vjp_segment(spectrum_of(*fft_, u0), steps_, cot, w);

  // Entry boundary: what_0 = fft(u0) has adjoint n^2 Re(ifft).
  Vec out = field_of(*fft_, std::move(cot));
  out *= n2;
  return out;
}

std::pair<Vec, Vec> NSModel::velocity(const Vec& vorticity) const {
  Work w(n_);
  CVec what = spectrum_of(*fft_, vorticity);
  for (std::size_t s = 0; s < what.size(); ++s) {
    const Cplx psi = invk2_[s] * what[s];
    w.a[s] = iky_[s] * psi;
    w.b[s] = -ikx_[s] * psi;
  }
  return {field_of(*fft_, w.a), field_of(*fft_, w.b)};
}

double NSModel::max_spectral_divergence(const Vec& vorticity) const {
  auto [v1, v2] = velocity(vorticity);
  CVec v1h = spectrum_of(*fft_, v1);
  CVec v2h = spectrum_of(*fft_, v2);
  double worst = 0.0;
  for (std::size_t s = 0; s < v1h.size(); ++s) {
    worst = std::max(worst, std::abs(ikx_[s] * v1h[s] + iky_[s] * v2h[s]));
  }
  return worst;
}

}  // namespace mcae
