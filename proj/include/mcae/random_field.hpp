#ifndef MCAE_RANDOM_FIELD_HPP
#define MCAE_RANDOM_FIELD_HPP

#include <cstdint>

#include "mcae/linalg.hpp"
#include "mcae/rng.hpp"

namespace mcae {

struct GridDesc {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  bool periodic = false;
  // Weight of the discrete inner product <a,b> = w sum_i a_i b_i under which
  // KL modes are orthonormal. Nodal (heat) bases use w = 1, i.e. plain
  // Euclidean orthonormality of the discretized kernel eigenvectors;
  // spectral (periodic) bases use the L2 quadrature weight w = 1/(nx*ny).
  double inner_weight = 1.0;

  int num_nodes() const { return nx * ny; }
};

/// Truncated Karhunen-Loeve basis: u = sum_i sqrt(lambda_i) phi_i z_i.
struct KLBasis {
  int num_modes = 0;
  Vec eigenvalues;  // descending, nonnegative
  Mat modes;        // (num_nodes x num_modes), orthonormal in <.,.>_w
  GridDesc grid;
};

struct HeatKernelParams {
  double corr_length = 0.5;  // isotropic exponential kernel exp(-|x-x'|/l)
  double variance = 1.0;
};

/// Two-stage observation-noise description: delta corrupts the synthetic
/// data once, epsilon re-randomizes it every training epoch.
struct NoiseSpec {
  double delta = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// Dense eigendecomposition of the exponential covariance kernel sampled at
/// the grid nodes; returns the top-q eigenpairs.
KLBasis build_heat_kl(const GridDesc& grid, int q, const HeatKernelParams& params);

/// As build_heat_kl but for an explicitly given covariance matrix over the
/// grid nodes (used by tests with synthetic kernels).
KLBasis build_kl_from_covariance(const GridDesc& grid, int q, const Mat& cov);

/// Spectral KL basis of the periodic covariance operator
/// 7^{3/2} (-Laplacian + 49 I)^{-2.5} on (0,1)^2: eigenvalues
/// 7^{3/2} (4 pi^2 |k|^2 + 49)^{-2.5}, modes are real Fourier harmonics
/// sqrt(2) cos(2 pi k.x), sqrt(2) sin(2 pi k.x), ordered by descending
/// eigenvalue then lexicographic wavenumber (cosine before sine).
/// The grid must have even extent; n is the nodes-per-side count.
KLBasis build_ns_kl(int n, int q = 24);

/// Continuum eigenvalue of the Navier-Stokes covariance operator at integer
/// wavenumber (kx, ky).
double ns_kl_eigenvalue(int kx, int ky);

/// u = modes * (sqrt(eigenvalues) .* z) for given coefficients z.
Vec sample_from_coeffs(const KLBasis& basis, const Vec& z);

/// Draw z ~ N(0, I) from rng and expand.
Vec sample_field(const KLBasis& basis, CounterRng& rng);

/// y_clean + d .* y_clean with d ~ N(0, delta^2 I).
Vec corrupt(const Vec& y_clean, double delta, CounterRng& rng);

/// y + zeta .* y with zeta ~ N(0, epsilon^2 I); fresh draw per call.
/// Every call increments the global randomize audit counter.
Vec randomize(const Vec& y, double epsilon, CounterRng& rng);

/// Process-wide count of randomize() calls, for noise-discipline audits.
std::uint64_t randomize_call_count();
void reset_randomize_call_count();

}  // namespace mcae

#endif
