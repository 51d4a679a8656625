#include "mcae/spectral.hpp"

#include <fftw3.h>

#include <mutex>

namespace mcae {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2::Fft2(int n) : n_(n) {
  if (n < 2) throw DimensionError("Fft2: grid too small");
  std::lock_guard<std::mutex> lock(planner_mutex());
  CVec scratch(static_cast<std::size_t>(n) * n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fwd_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  inv_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fwd_ || !inv_) throw NumericError("Fft2: plan creation failed");
}

Fft2::~Fft2() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void Fft2::forward(Cplx* buf) const {
  auto* b = reinterpret_cast<fftw_complex*>(buf);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), b, b);
}

void Fft2::inverse(Cplx* buf) const {
  auto* b = reinterpret_cast<fftw_complex*>(buf);
  fftw_execute_dft(static_cast<fftw_plan>(inv_), b, b);
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  const std::size_t total = static_cast<std::size_t>(n_) * n_;
  for (std::size_t i = 0; i < total; ++i) buf[i] *= scale;
}

CVec spectrum_of(const Fft2& fft, const Vec& field) {
  const std::size_t total = static_cast<std::size_t>(fft.n()) * fft.n();
  if (field.size() != static_cast<Eigen::Index>(total)) {
    throw DimensionError("spectrum_of: field size mismatch");
  }
  CVec buf(total);
  for (std::size_t i = 0; i < total; ++i) {
    buf[i] = Cplx(field(static_cast<Eigen::Index>(i)), 0.0);
  }
  fft.forward(buf.data());
  return buf;
}

Vec field_of(const Fft2& fft, CVec spectrum) {
  const std::size_t total = static_cast<std::size_t>(fft.n()) * fft.n();
  if (spectrum.size() != total) {
    throw DimensionError("field_of: spectrum size mismatch");
  }
  fft.inverse(spectrum.data());
  Vec out(static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i) {
    out(static_cast<Eigen::Index>(i)) = spectrum[i].real();
  }
  return out;
}

int fft_freq(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace mcae
