#include "mcae/linear_analysis.hpp"

#include <cmath>
#include <limits>

namespace mcae {

Approach approach_from_string(const std::string& name) {
  if (name == "nPOP") return Approach::npop;
  if (name == "nOPO") return Approach::nopo;
  if (name == "mcPOP") return Approach::mcpop;
  if (name == "mcOPO") return Approach::mcopo;
  if (name == "mcOPO-Full") return Approach::mcopo_full;
  if (name == "TAEN") return Approach::taen;
  if (name == "TAEN-Full") return Approach::taen_full;
  throw DimensionError("unknown approach: " + name);
}

std::string approach_name(Approach a) {
  switch (a) {
    case Approach::npop: return "nPOP";
    case Approach::nopo: return "nOPO";
    case Approach::mcpop: return "mcPOP";
    case Approach::mcopo: return "mcOPO";
    case Approach::mcopo_full: return "mcOPO-Full";
    case Approach::taen: return "TAEN";
    case Approach::taen_full: return "TAEN-Full";
  }
  return "?";
}

bool approach_is_full(Approach a) {
  return a == Approach::mcopo_full || a == Approach::taen_full;
}

bool approach_randomizes(Approach a) {
  switch (a) {
    case Approach::mcopo:
    case Approach::mcopo_full:
    case Approach::taen:
    case Approach::taen_full:
      return true;
    default:
      return false;
  }
}

void LinearProblem::validate() const {
  if (U.cols() != Y.cols()) {
    throw DimensionError("LinearProblem: U and Y column counts differ");
  }
  if (GB.cols() != U.rows() || GB.rows() != Y.rows()) {
    throw DimensionError("LinearProblem: GB shape inconsistent with data");
  }
  if (G_full && G_full->cols() != GB.cols()) {
    throw DimensionError("LinearProblem: G_full column count mismatch");
  }
  if (u0.size() != 0 && u0.size() != U.rows()) {
    throw DimensionError("LinearProblem: u0 dimension mismatch");
  }
  if (lambda < 0.0) throw DimensionError("LinearProblem: negative lambda");
}

namespace {

struct CenteredData {
  Vec ubar, ybar;
  Mat Ubar, Ybar;
};

// Repeated-column data must center to exactly zero for the degenerate
// closed forms to hold; snap pure-roundoff residue so a tiny pinv does not
// reconstruct an O(1) projector.
Mat snap_centered(Mat centered, const Mat& original) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (centered.norm() <= 64.0 * eps * (1.0 + original.norm())) {
    centered.setZero();
  }
  return centered;
}

CenteredData center_data(const LinearProblem& p) {
  auto cu = center(p.U);
  auto cy = center(p.Y);
  return {cu.mean, cy.mean, snap_centered(cu.centered, p.U),
          snap_centered(cy.centered, p.Y)};
}

Mat regularized_identity(const LinearProblem& p) {
  return Mat::Identity(p.n(), p.n()) + p.lambda * p.GB.transpose() * p.GB;
}

const Mat& full_map(const LinearProblem& p) {
  if (!p.G_full) {
    throw DimensionError("fit: full variant requires G_full");
  }
  return *p.G_full;
}

// Zbar-type matrices are products of solves and projections, so their noise
// floor sits well above eps * sigma_max; truncating at 1e-11 separates the
// genuine spectrum (ratios >> 1e-6 in these constructions) from roundoff
// directions whose inverses would poison the projector.
constexpr double kProjectorRtol = 1e-11;

// Decoder of the inverse-PtO family: Wd = M Zbar Zbar^+,
// bd = M (I - Zbar Zbar^+) zbar.
AffineMap projected_decoder(const Mat& M, const Mat& Zbar, const Vec& zbar) {
  Mat proj = Zbar * pinv(Zbar, kProjectorRtol);
  AffineMap dec;
  dec.W = M * proj;
  dec.b = M * (zbar - proj * zbar);
  return dec;
}

}  // namespace

EncDec fit_npop(const LinearProblem& p) {
  p.validate();
  auto d = center_data(p);
  EncDec out;
  // Data-driven form of the encoder optimum; coincides with GB Ubar Ubar^+
  // for noise-free Y.
  out.enc.W = d.Ybar * pinv(d.Ubar);
  out.enc.b = d.ybar - out.enc.W * d.ubar;
  out.dec.W = d.Ubar * pinv(d.Ybar);
  out.dec.b = d.ubar - out.dec.W * d.ybar;
  return out;
}

EncDec fit_nopo(const LinearProblem& p) {
  p.validate();
  auto d = center_data(p);
  EncDec out;
  out.enc.W = d.Ubar * pinv(d.Ybar);
  out.enc.b = d.ubar - out.enc.W * d.ybar;
  Mat Zbar = out.enc.W * d.Ybar;  // = Ubar Ybar^+ Ybar
  out.dec.W = d.Ybar * pinv(Zbar, kProjectorRtol);
  out.dec.b = d.ybar - out.dec.W * d.ubar;
  return out;
}

EncDec fit_mcpop(const LinearProblem& p) {
  p.validate();
  auto d = center_data(p);
  EncDec out;
  out.enc = fit_npop(p).enc;
  Mat ypinv = pinv(d.Ybar);
  Mat yproj = d.Ybar * ypinv;
  Mat a = regularized_identity(p);
  Mat rhsW = d.Ubar * ypinv + p.lambda * p.GB.transpose() * yproj;
  out.dec.W = solve_spd(a, rhsW);
  out.dec.b = solve_spd(
      a, d.ubar + p.lambda * p.GB.transpose() * d.ybar - rhsW * d.ybar);
  return out;
}

EncDec fit_mcopo(const LinearProblem& p, bool full) {
  p.validate();
  auto d = center_data(p);
  EncDec out;
  Mat ypinv = pinv(d.Ybar);
  Mat yproj = d.Ybar * ypinv;
  Mat a = regularized_identity(p);
  Mat rhsW = d.Ubar * ypinv + p.lambda * p.GB.transpose() * yproj;
  out.enc.W = solve_spd(a, rhsW);
  out.enc.b = solve_spd(
      a, d.ubar + p.lambda * p.GB.transpose() * d.ybar - rhsW * d.ybar);
  Vec zbar =
      solve_spd(a, Vec(d.ubar + p.lambda * p.GB.transpose() * d.ybar));
  Mat Zbar = solve_spd(a, Mat(d.Ubar * ypinv * d.Ybar +
                              p.lambda * p.GB.transpose() * d.Ybar));
  out.dec = projected_decoder(full ? full_map(p) : p.GB, Zbar, zbar);
  return out;
}

EncDec fit_taen(const LinearProblem& p, bool full) {
  p.validate();
  if (p.u0.size() == 0) {
    throw DimensionError("fit_taen: u0 required");
  }
  auto d = center_data(p);
  EncDec out;
  Mat ypinv = pinv(d.Ybar);
  Mat yproj = d.Ybar * ypinv;
  Mat a = regularized_identity(p);
  Mat rhsW = p.lambda * p.GB.transpose() * yproj;
  out.enc.W = solve_spd(a, rhsW);
  out.enc.b = solve_spd(
      a, p.u0 + p.lambda * p.GB.transpose() * d.ybar - rhsW * d.ybar);
  Vec zbar = solve_spd(a, Vec(p.u0 + p.lambda * p.GB.transpose() * d.ybar));
  Mat Zbar = solve_spd(a, Mat(p.lambda * p.GB.transpose() * d.Ybar));
  out.dec = projected_decoder(full ? full_map(p) : p.GB, Zbar, zbar);
  return out;
}

EncDec fit(Approach a, const LinearProblem& p) {
  switch (a) {
    case Approach::npop: return fit_npop(p);
    case Approach::nopo: return fit_nopo(p);
    case Approach::mcpop: return fit_mcpop(p);
    case Approach::mcopo: return fit_mcopo(p, false);
    case Approach::mcopo_full: return fit_mcopo(p, true);
    case Approach::taen: return fit_taen(p, false);
    case Approach::taen_full: return fit_taen(p, true);
  }
  throw DimensionError("fit: unknown approach");
}

ErrorPrediction predict_test_errors(Approach a, const LinearProblem& p,
                                    const Vec& u_test, const Vec& y_test) {
  p.validate();
  auto d = center_data(p);
  const Mat I = Mat::Identity(p.n(), p.n());
  Mat ypinv = pinv(d.Ybar);
  Mat yproj = d.Ybar * ypinv;
  const Mat Im = Mat::Identity(p.m(), p.m());
  const Vec du = u_test - d.ubar;
  const Vec dy = y_test - d.ybar;

  ErrorPrediction out;
  switch (a) {
    case Approach::npop:
    case Approach::nopo: {
      out.inverse_sq = (d.Ubar * ypinv * p.GB * du - du).squaredNorm();
      if (a == Approach::npop) {
        Mat upinv = pinv(d.Ubar);
        out.forward_sq = (p.GB * (d.Ubar * upinv - I) * du).squaredNorm();
      } else {
        Mat Zbar = d.Ubar * ypinv * d.Ybar;
        out.forward_sq =
            (d.Ybar * (pinv(Zbar, kProjectorRtol) - pinv(d.Ubar)) * du)
                .squaredNorm();
      }
      break;
    }
    case Approach::mcpop:
    case Approach::mcopo:
    case Approach::mcopo_full: {
      Mat areg = regularized_identity(p);
      // Exact error of the Tikhonov-equivalent inverse surrogate at a
      // noise-free test pair; the (I - Ybar Ybar^+) term enters with a minus
      // sign (it vanishes in the full-row-rank regime).
      Vec inner = (d.Ubar * ypinv * p.GB - I) * du -
                  p.lambda * p.GB.transpose() * (Im - yproj) * p.GB * du;
      out.inverse_sq = solve_spd(areg, Mat(inner)).squaredNorm();
      if (a == Approach::mcpop) {
        Mat upinv = pinv(d.Ubar);
        out.forward_sq = (p.GB * (d.Ubar * upinv - I) * du).squaredNorm();
      } else {
        Vec zbar = solve_spd(
            areg, Vec(d.ubar + p.lambda * p.GB.transpose() * d.ybar));
        Mat Zbar = solve_spd(areg, Mat(d.Ubar * ypinv * d.Ybar +
                                       p.lambda * p.GB.transpose() * d.Ybar));
        Mat proj = Zbar * pinv(Zbar, kProjectorRtol);
        out.forward_sq =
            (p.GB * (proj - I) * (u_test - zbar)).squaredNorm();
      }
      break;
    }
    case Approach::taen:
    case Approach::taen_full: {
      if (p.u0.size() == 0) throw DimensionError("predict: u0 required");
      Mat areg = regularized_identity(p);
      Vec inner = (p.u0 - u_test) -
                  p.lambda * p.GB.transpose() * (Im - yproj) * dy;
      out.inverse_sq = solve_spd(areg, Mat(inner)).squaredNorm();
      out.taen_bound = (p.u0 - u_test).squaredNorm();
      Vec zbar =
          solve_spd(areg, Vec(p.u0 + p.lambda * p.GB.transpose() * d.ybar));
      Mat Zbar = solve_spd(areg, Mat(p.lambda * p.GB.transpose() * d.Ybar));
      Mat proj = Zbar * pinv(Zbar, kProjectorRtol);
      out.forward_sq = (p.GB * (proj - I) * (u_test - zbar)).squaredNorm();
      break;
    }
  }
  return out;
}

double ResidualBundle::max_relative() const {
  double m = std::max(std::max(grad_We, grad_be), std::max(grad_Wd, grad_bd));
  m = std::max(m, coupling);
  return m / scale;
}

ResidualBundle simultaneous_residual(const AffineMap& enc, const AffineMap& dec,
                                     const LinearProblem& p, double beta,
                                     bool inverse_pto_layout) {
  p.validate();
  if (beta <= 0.0) throw DimensionError("simultaneous_residual: beta <= 0");
  const Mat& X = inverse_pto_layout ? p.Y : p.U;
  const Mat& T = inverse_pto_layout ? p.U : p.Y;
  const Eigen::Index nt = X.cols();
  const Vec ones = Vec::Ones(nt);

  Mat Z = enc(X);
  Mat Re = Z - T;                    // encoder misfit
  Mat Rd = dec(Z) - X;               // reconstruction misfit

  ResidualBundle out;
  out.grad_Wd = (Rd * Z.transpose()).norm();
  out.grad_bd = (Rd * ones).norm();
  Mat pulled = Re + beta * dec.W.transpose() * Rd;
  out.grad_We = (pulled * X.transpose()).norm();
  out.grad_be = (pulled * ones).norm();

  Mat Xbar = center(X).centered;
  Mat C = enc.W * Xbar * Xbar.transpose();
  out.coupling = (C - enc.W * dec.W * C).norm();

  const double xn = X.norm();
  const double tn = T.norm();
  out.scale = 1.0 + xn + tn + xn * xn + xn * tn;
  return out;
}

double PhaseGradients::max_relative() const {
  double m = std::max(std::max(dWe.norm(), dWd.norm()),
                      std::max(dbe.norm(), dbd.norm()));
  return m / scale;
}

PhaseGradients sequential_loss_gradients(Approach a, const LinearProblem& p,
                                         const EncDec& maps) {
  p.validate();
  const Eigen::Index nt = p.n_t();
  const Vec ones = Vec::Ones(nt);
  PhaseGradients g;

  const bool pto_first = (a == Approach::npop || a == Approach::mcpop);
  const Mat& X = pto_first ? p.U : p.Y;

  // Encoder phase.
  Mat O = maps.enc(X);
  Mat Delta;
  switch (a) {
    case Approach::npop:
    case Approach::mcpop:
      Delta = O - p.Y;
      break;
    case Approach::nopo:
      Delta = O - p.U;
      break;
    case Approach::mcopo:
    case Approach::mcopo_full:
      Delta = (O - p.U) +
              p.lambda * p.GB.transpose() * (p.GB * O - p.Y);
      break;
    case Approach::taen:
    case Approach::taen_full:
      Delta = (O.colwise() - p.u0) +
              p.lambda * p.GB.transpose() * (p.GB * O - p.Y);
      break;
  }
  g.dWe = Delta * X.transpose();
  g.dbe = Delta * ones;

  // Decoder phase against the frozen encoder.
  Mat Z = O;
  Mat D = maps.dec(Z);
  Mat DeltaD;
  switch (a) {
    case Approach::npop:
      DeltaD = D - p.U;
      break;
    case Approach::nopo:
      DeltaD = D - p.Y;
      break;
    case Approach::mcpop:
      DeltaD = (D - p.U) +
               p.lambda * p.GB.transpose() * (p.GB * D - p.Y);
      break;
    case Approach::mcopo:
    case Approach::taen:
      DeltaD = D - p.GB * Z;
      break;
    case Approach::mcopo_full:
    case Approach::taen_full:
      DeltaD = D - full_map(p) * Z;
      break;
  }
  g.dWd = DeltaD * Z.transpose();
  g.dbd = DeltaD * ones;

  const double xn = std::max(p.U.norm(), p.Y.norm());
  const double gn = 1.0 + p.lambda * p.GB.norm() * p.GB.norm();
  g.scale = 1.0 + gn * xn * (1.0 + xn);
  return g;
}

}  // namespace mcae
