#ifndef MCAE_HEAT_HPP
#define MCAE_HEAT_HPP

#include <vector>

#include "mcae/forward_model.hpp"

namespace mcae {

// 2D heat conductivity problem on (0,1)^2:
//   -div(e^u grad(w)) = source,  w = 0 on Gamma_ext,  zero flux on Gamma_root.
// Gamma_root is the right edge (x = 1); Gamma_ext the remaining three edges.
// Discretization: bilinear quadrilaterals on an (nx x ny)-node uniform grid,
// 2x2 Gauss quadrature, per-element conductivity e^{mean of corner u}.
// Node index = j * nx + i for coordinates (i/(nx-1), j/(ny-1)).

enum class HeatBoundary {
  dirichlet_ext_neumann_root,  // production setting
  all_dirichlet,               // symmetric variant used by invariance tests
};

class HeatModel final : public ForwardModel {
public:
  HeatModel(int nx, int ny, std::vector<int> obs_indices, double source = 20.0,
            HeatBoundary boundary = HeatBoundary::dirichlet_ext_neumann_root);

  int param_dim() const override { return nx_ * ny_; }
  int state_dim() const override { return nx_ * ny_; }

  /// FEM solution w(u); exact zeros at Dirichlet nodes.
  Vec apply(const Vec& u) const override;

  /// Discrete adjoint: solve K lambda = cot (K symmetric), then accumulate
  /// -lambda^T (dK/du_j) w element-wise.
  Vec vjp(const Vec& u, const Vec& cot_state) const override;

  /// Residual || K(u) w - f || of a given state against the assembled system
  /// (free nodes only); diagnostic used by tests.
  double system_residual(const Vec& u, const Vec& w) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double source() const { return source_; }
  bool is_dirichlet_node(int idx) const { return free_index_[idx] < 0; }

  /// Interior (non-boundary) node indices, the admissible observation sites.
  static std::vector<int> interior_nodes(int nx, int ny);

private:
  struct Assembled {
    Mat k_free;     // reduced stiffness (free x free)
    Vec f_free;     // reduced load
    Vec cond;       // per-element conductivity e^{u_mean}
  };
  Assembled assemble(const Vec& u) const;
  Vec solve_state(const Assembled& sys) const;

  int nx_, ny_;
  double source_;
  HeatBoundary boundary_;
  Mat k_local_;                  // 4x4 unit-conductivity element stiffness
  Vec f_local_;                  // element load for unit source
  std::vector<int> free_nodes_;  // global indices of non-Dirichlet nodes
  std::vector<int> free_index_;  // global -> free position, -1 if Dirichlet
};

}  // namespace mcae

#endif
