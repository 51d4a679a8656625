#include "mcae/heat.hpp"

#include <Eigen/Cholesky>
#include <array>
#include <cmath>

namespace mcae {

namespace {

// Local node order within an element: SW, SE, NE, NW.
constexpr int kCorner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

}  // namespace

HeatModel::HeatModel(int nx, int ny, std::vector<int> obs_indices,
                     double source, HeatBoundary boundary)
    : nx_(nx), ny_(ny), source_(source), boundary_(boundary) {
  if (nx < 2 || ny < 2) {
    throw DimensionError("HeatModel: need at least a 2x2 node grid");
  }
  const double dx = 1.0 / (nx - 1);
  const double dy = 1.0 / (ny - 1);

  // Element stiffness and load for unit conductivity/source via 2x2 Gauss
  // quadrature on the reference square; exact for bilinear elements.
  k_local_ = Mat::Zero(4, 4);
  f_local_ = Vec::Zero(4);
  const double gp = 1.0 / std::sqrt(3.0);
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx) {
      const double xi = gp * (qx == 0 ? -1.0 : 1.0);
      const double eta = gp * (qy == 0 ? -1.0 : 1.0);
      std::array<double, 4> shape{};
      std::array<double, 4> dsx{};
      std::array<double, 4> dsy{};
      for (int a = 0; a < 4; ++a) {
        const double sx = kCorner[a][0] == 0 ? -1.0 : 1.0;
        const double sy = kCorner[a][1] == 0 ? -1.0 : 1.0;
        shape[a] = 0.25 * (1.0 + sx * xi) * (1.0 + sy * eta);
        dsx[a] = 0.25 * sx * (1.0 + sy * eta) * (2.0 / dx);
        dsy[a] = 0.25 * sy * (1.0 + sx * xi) * (2.0 / dy);
      }
      const double w = (dx * dy) / 4.0;  // Jacobian x unit Gauss weight
      for (int a = 0; a < 4; ++a) {
        f_local_(a) += w * shape[a];
        for (int b = 0; b < 4; ++b) {
          k_local_(a, b) += w * (dsx[a] * dsx[b] + dsy[a] * dsy[b]);
        }
      }
    }
  }

  free_index_.assign(nx_ * ny_, -1);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      bool dirichlet;
      if (boundary_ == HeatBoundary::all_dirichlet) {
        dirichlet = (i == 0 || i == nx_ - 1 || j == 0 || j == ny_ - 1);
      } else {
        dirichlet = (i == 0 || j == 0 || j == ny_ - 1);  // right edge is free
      }
      if (!dirichlet) {
        free_index_[j * nx_ + i] = static_cast<int>(free_nodes_.size());
        free_nodes_.push_back(j * nx_ + i);
      }
    }
  }

  set_obs_indices(std::move(obs_indices));
}

std::vector<int> HeatModel::interior_nodes(int nx, int ny) {
  std::vector<int> nodes;
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      nodes.push_back(j * nx + i);
    }
  }
  return nodes;
}

HeatModel::Assembled HeatModel::assemble(const Vec& u) const {
  if (u.size() != param_dim()) {
    throw DimensionError("HeatModel: parameter dimension mismatch");
  }
  require_finite(u, "HeatModel::assemble");
  const int nex = nx_ - 1;
  const int ney = ny_ - 1;
  const int nf = static_cast<int>(free_nodes_.size());

  Assembled sys;
  sys.k_free = Mat::Zero(nf, nf);
  sys.f_free = Vec::Zero(nf);
  sys.cond = Vec(nex * ney);

  for (int ej = 0; ej < ney; ++ej) {
    for (int ei = 0; ei < nex; ++ei) {
      int nodes[4];
      double umean = 0.0;
      for (int a = 0; a < 4; ++a) {
        nodes[a] = (ej + kCorner[a][1]) * nx_ + (ei + kCorner[a][0]);
        umean += u(nodes[a]);
      }
      const double cond = std::exp(0.25 * umean);
      sys.cond(ej * nex + ei) = cond;
      for (int a = 0; a < 4; ++a) {
        const int fa = free_index_[nodes[a]];
        if (fa < 0) continue;
        sys.f_free(fa) += source_ * f_local_(a);
        for (int b = 0; b < 4; ++b) {
          const int fb = free_index_[nodes[b]];
          if (fb < 0) continue;  // homogeneous Dirichlet: no lift term
          sys.k_free(fa, fb) += cond * k_local_(a, b);
        }
      }
    }
  }
  return sys;
}

Vec HeatModel::solve_state(const Assembled& sys) const {
  Eigen::LLT<Mat> llt(sys.k_free);
  if (llt.info() != Eigen::Success) {
    throw NumericError("HeatModel: stiffness factorization failed");
  }
  Vec wf = llt.solve(sys.f_free);
  Vec w = Vec::Zero(nx_ * ny_);
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
    w(free_nodes_[i]) = wf(static_cast<Eigen::Index>(i));
  }
  return w;
}

Vec HeatModel::apply(const Vec& u) const { return solve_state(assemble(u)); }

double HeatModel::system_residual(const Vec& u, const Vec& w) const {
  Assembled sys = assemble(u);
  Vec wf(free_nodes_.size());
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
    wf(static_cast<Eigen::Index>(i)) = w(free_nodes_[i]);
  }
  return (sys.k_free * wf - sys.f_free).norm();
}

Vec HeatModel::vjp(const Vec& u, const Vec& cot_state) const {
  if (cot_state.size() != state_dim()) {
    throw DimensionError("HeatModel::vjp: cotangent dimension mismatch");
  }
  Assembled sys = assemble(u);
  Eigen::LLT<Mat> llt(sys.k_free);
  if (llt.info() != Eigen::Success) {
    throw NumericError("HeatModel: stiffness factorization failed");
  }
  Vec wf = llt.solve(sys.f_free);

  Vec cf(free_nodes_.size());
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
    cf(static_cast<Eigen::Index>(i)) = cot_state(free_nodes_[i]);
  }
  Vec lf = llt.solve(cf);  // K is symmetric: same factorization

  // dK/du_j = sum over elements containing j of (cond_e / 4) K_local;
  // cot_u_j = -lambda^T dK/du_j w accumulated per element.
  Vec cot_u = Vec::Zero(param_dim());
  const int nex = nx_ - 1;
  const int ney = ny_ - 1;
  for (int ej = 0; ej < ney; ++ej) {
    for (int ei = 0; ei < nex; ++ei) {
      int nodes[4];
      for (int a = 0; a < 4; ++a) {
        nodes[a] = (ej + kCorner[a][1]) * nx_ + (ei + kCorner[a][0]);
      }
      double lkw = 0.0;
      for (int a = 0; a < 4; ++a) {
        const int fa = free_index_[nodes[a]];
        if (fa < 0) continue;
        double row = 0.0;
        for (int b = 0; b < 4; ++b) {
          const int fb = free_index_[nodes[b]];
          if (fb < 0) continue;
          row += k_local_(a, b) * wf(fb);
        }
        lkw += lf(fa) * row;
      }
      const double factor = -0.25 * sys.cond(ej * nex + ei) * lkw;
      for (int a = 0; a < 4; ++a) cot_u(nodes[a]) += factor;
    }
  }
  return cot_u;
}

}  // namespace mcae
