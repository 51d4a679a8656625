#include "mcae/random_field.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <tuple>
#include <vector>

namespace mcae {

namespace {

std::atomic<std::uint64_t> g_randomize_calls{0};

}  // namespace

KLBasis build_kl_from_covariance(const GridDesc& grid, int q, const Mat& cov) {
  const int n = grid.num_nodes();
  if (cov.rows() != n || cov.cols() != n) {
    throw DimensionError("build_kl: covariance size does not match grid");
  }
  if (q < 1 || q > n) {
    throw DimensionError("build_kl: mode count q out of range");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericError("build_kl: eigendecomposition failed");
  }
  // Eigen returns ascending order; take the top q, descending.
  const Vec& vals = eig.eigenvalues();
  const double lmax = vals(n - 1);
  KLBasis basis;
  basis.grid = grid;
  basis.num_modes = q;
  basis.eigenvalues = Vec(q);
  basis.modes = Mat(n, q);
  for (int i = 0; i < q; ++i) {
    double lambda = vals(n - 1 - i);
    if (lambda < -1e-10 * std::max(lmax, 1.0)) {
      throw NumericError(
          "build_kl: discretized kernel is not positive semidefinite "
          "(eigenvalue " + std::to_string(lambda) + ")");
    }
    basis.eigenvalues(i) = std::max(lambda, 0.0);
    basis.modes.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  return basis;
}

KLBasis build_heat_kl(const GridDesc& grid, int q, const HeatKernelParams& params) {
  const int n = grid.num_nodes();
  Mat cov(n, n);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int a = j * grid.nx + i;
      const double xa = i * grid.dx;
      const double ya = j * grid.dy;
      for (int l = 0; l < grid.ny; ++l) {
        for (int k = 0; k < grid.nx; ++k) {
          const int b = l * grid.nx + k;
          const double r = std::hypot(k * grid.dx - xa, l * grid.dy - ya);
          cov(a, b) = params.variance * std::exp(-r / params.corr_length);
        }
      }
    }
  }
  GridDesc g = grid;
  g.inner_weight = 1.0;
  return build_kl_from_covariance(g, q, cov);
}

double ns_kl_eigenvalue(int kx, int ky) {
  const double k2 = 4.0 * M_PI * M_PI * (double(kx) * kx + double(ky) * ky);
  return std::pow(7.0, 1.5) * std::pow(k2 + 49.0, -2.5);
}

KLBasis build_ns_kl(int n, int q) {
  if (n < 2 || n % 2 != 0) {
    throw DimensionError("build_ns_kl: grid extent must be even and >= 2");
  }
  if (q < 1 || q > n * n) {
    throw DimensionError("build_ns_kl: mode count q out of range");
  }

  // Wavenumber representatives over the half-plane (ky > 0, or ky == 0 and
  // kx >= 0); each nonzero representative contributes a cosine and a sine
  // mode with the same eigenvalue.
  struct Cand {
    double lambda;
    int kx, ky;
    int trig;  // 0 cosine, 1 sine
  };
  std::vector<Cand> cands;
  const int kmax = n / 2 - 1;  // stay below Nyquist; q is small in practice
  for (int ky = 0; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      if (ky == 0 && kx < 0) continue;
      const double lambda = ns_kl_eigenvalue(kx, ky);
      cands.push_back({lambda, kx, ky, 0});
      if (!(kx == 0 && ky == 0)) cands.push_back({lambda, kx, ky, 1});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(b.lambda, a.kx, a.ky, a.trig) <
           std::tie(a.lambda, b.kx, b.ky, b.trig);
  });
  if (q > static_cast<int>(cands.size())) {
    throw DimensionError("build_ns_kl: q exceeds representable modes");
  }

  KLBasis basis;
  basis.grid = GridDesc{n, n, 1.0 / n, 1.0 / n, true, 1.0 / (double(n) * n)};
  basis.num_modes = q;
  basis.eigenvalues = Vec(q);
  basis.modes = Mat(n * n, q);
  for (int m = 0; m < q; ++m) {
    const Cand& c = cands[m];
    basis.eigenvalues(m) = c.lambda;
    const double amp = (c.kx == 0 && c.ky == 0) ? 1.0 : std::sqrt(2.0);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double phase =
            2.0 * M_PI * (c.kx * (double(i) / n) + c.ky * (double(j) / n));
        basis.modes(j * n + i, m) =
            amp * (c.trig == 0 ? std::cos(phase) : std::sin(phase));
      }
    }
  }
  return basis;
}

Vec sample_from_coeffs(const KLBasis& basis, const Vec& z) {
  if (z.size() != basis.num_modes) {
    throw DimensionError("sample_from_coeffs: coefficient count mismatch");
  }
  return basis.modes * basis.eigenvalues.cwiseSqrt().cwiseProduct(z);
}

Vec sample_field(const KLBasis& basis, CounterRng& rng) {
  Vec z(basis.num_modes);
  for (int i = 0; i < basis.num_modes; ++i) z(i) = rng.normal();
  return sample_from_coeffs(basis, z);
}

Vec corrupt(const Vec& y_clean, double delta, CounterRng& rng) {
  if (delta < 0.0) throw DimensionError("corrupt: delta must be nonnegative");
  Vec y = y_clean;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) += delta * rng.normal() * y_clean(i);
  }
  return y;
}

Vec randomize(const Vec& y, double epsilon, CounterRng& rng) {
  if (epsilon < 0.0) {
    throw DimensionError("randomize: epsilon must be nonnegative");
  }
  g_randomize_calls.fetch_add(1, std::memory_order_relaxed);
  Vec out = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out(i) += epsilon * rng.normal() * y(i);
  }
  return out;
}

std::uint64_t randomize_call_count() {
  return g_randomize_calls.load(std::memory_order_relaxed);
}

void reset_randomize_call_count() {
  g_randomize_calls.store(0, std::memory_order_relaxed);
}

}  // namespace mcae
