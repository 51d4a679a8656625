#ifndef MCAE_SPECTRAL_HPP
#define MCAE_SPECTRAL_HPP

#include <complex>
#include <vector>

#include "mcae/linalg.hpp"

namespace mcae {

using Cplx = std::complex<double>;
using CVec = std::vector<Cplx>;

// Thin FFTW wrapper for in-place complex 2D transforms on an n x n grid.
// Plans are created unaligned so execution on arbitrary caller buffers is
// valid; plan creation is serialized internally (FFTW requirement), while
// execution is thread-safe on distinct buffers.
class Fft2 {
public:
  explicit Fft2(int n);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  int n() const { return n_; }

  /// Unnormalized forward DFT, in place.
  void forward(Cplx* buf) const;
  /// Inverse DFT scaled by 1/n^2, in place.
  void inverse(Cplx* buf) const;

private:
  int n_;
  void* fwd_;  // fftw_plan
  void* inv_;
};

/// Spectrum of a real field (row-major node order, index j*n + i).
CVec spectrum_of(const Fft2& fft, const Vec& field);
/// Real part of the inverse transform.
Vec field_of(const Fft2& fft, CVec spectrum);

/// Integer frequency of spectral index i on an even n-grid: 0..n/2-1, then
/// -n/2..-1 (standard FFT layout).
int fft_freq(int i, int n);

}  // namespace mcae

#endif
