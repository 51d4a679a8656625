#include <cmath>

#include "doctest.h"
#include "mcae/linear_analysis.hpp"
#include "mcae/random_field.hpp"
#include "mcae/rng.hpp"

using namespace mcae;

namespace {

Mat random_matrix(int rows, int cols, CounterRng& rng) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

// Noise-free linear problem: Y = GB U.
LinearProblem make_problem(std::uint64_t seed, int n, int m, int nt,
                           double lambda, bool tall_gb = false) {
  CounterRng rng(seed);
  LinearProblem p;
  p.GB = random_matrix(tall_gb ? n + 2 : m, n, rng);
  p.U = random_matrix(n, nt, rng);
  p.Y = p.GB * p.U;
  p.u0 = 0.3 * random_matrix(n, 1, rng).col(0);
  p.lambda = lambda;
  return p;
}

// Single observation sample expanded by randomization: U columns identical,
// Y columns are fresh multiplicative-noise draws of one y.
LinearProblem single_sample_randomized(std::uint64_t seed, int n, int m,
                                       int nt, double lambda) {
  CounterRng rng(seed);
  LinearProblem p;
  p.GB = random_matrix(m, n, rng);
  Vec u = random_matrix(n, 1, rng).col(0);
  Vec y = p.GB * u + Vec::Constant(m, 0.2);  // keep entries off zero
  p.U = u.replicate(1, nt);
  p.Y = Mat(m, nt);
  for (int i = 0; i < nt; ++i) {
    CounterRng s = rng.stream(i);
    p.Y.col(i) = randomize(y, 0.3, s);
  }
  p.u0 = 0.1 * random_matrix(n, 1, rng).col(0);
  p.lambda = lambda;
  return p;
}

// Independent iterative oracle: full-batch gradient descent on the affine
// least-squares loss 0.5||W X + b 1^T - T||^2, written straight from the
// loss definition.
AffineMap gd_affine(const Mat& X, const Mat& T, int iters, double lr) {
  AffineMap map;
  map.W = Mat::Zero(T.rows(), X.rows());
  map.b = Vec::Zero(T.rows());
  const Vec ones = Vec::Ones(X.cols());
  for (int it = 0; it < iters; ++it) {
    Mat r = (map.W * X).colwise() + map.b;
    r -= T;
    map.W -= lr * (r * X.transpose());
    map.b -= lr * (r * ones);
  }
  return map;
}

double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / (1.0 + b.norm());
}

}  // namespace

TEST_CASE("nPOP: exact PtO recovery with full-row-rank data") {
  LinearProblem p = make_problem(1, 3, 2, 8, 0.0);
  EncDec maps = fit_npop(p);
  CounterRng rng(100);
  for (int i = 0; i < 5; ++i) {
    Vec u = random_matrix(3, 1, rng).col(0);
    CHECK((maps.enc(u) - p.GB * u).norm() < 1e-8 * (1.0 + u.norm()));
  }
}

TEST_CASE("nPOP: repeated single column degenerates to constant maps") {
  CounterRng rng(2);
  LinearProblem p;
  p.GB = random_matrix(2, 3, rng);
  Vec u = random_matrix(3, 1, rng).col(0);
  p.U = u.replicate(1, 6);
  p.Y = p.GB * p.U;
  p.u0 = Vec::Zero(3);
  EncDec maps = fit_npop(p);
  CHECK(maps.enc.W.norm() < 1e-12);
  CHECK((maps.enc.b - p.GB * u).norm() < 1e-12);
  CHECK(maps.dec.W.norm() < 1e-12);
  CHECK((maps.dec.b - u).norm() < 1e-12);
}

TEST_CASE("nPOP closed form matches the gradient-descent oracle") {
  LinearProblem p = make_problem(3, 3, 2, 5, 0.0);
  EncDec maps = fit_npop(p);

  AffineMap enc_gd = gd_affine(p.U, p.Y, 60000, 2e-3);
  CHECK((enc_gd.W - maps.enc.W).norm() < 1e-6);
  CHECK((enc_gd.b - maps.enc.b).norm() < 1e-6);

  Mat z = enc_gd(p.U);
  AffineMap dec_gd = gd_affine(z, p.U, 60000, 2e-3);
  CHECK((dec_gd.W - maps.dec.W).norm() < 1e-5);
  CHECK((dec_gd.b - maps.dec.b).norm() < 1e-5);
}

TEST_CASE("nOPO: encoder equals the nPOP decoder; degenerate case") {
  LinearProblem p = make_problem(4, 4, 3, 9, 0.0);
  EncDec npop = fit_npop(p);
  EncDec nopo = fit_nopo(p);
  CHECK((nopo.enc.W - npop.dec.W).norm() < 1e-12 * (1.0 + npop.dec.W.norm()));
  CHECK((nopo.enc.b - npop.dec.b).norm() < 1e-12 * (1.0 + npop.dec.b.norm()));

  // Repeated sample: constant maps to the means.
  CounterRng rng(5);
  LinearProblem q;
  q.GB = random_matrix(3, 4, rng);
  Vec u = random_matrix(4, 1, rng).col(0);
  q.U = u.replicate(1, 5);
  q.Y = q.GB * q.U;
  q.u0 = Vec::Zero(4);
  EncDec maps = fit_nopo(q);
  CHECK(maps.enc.W.norm() < 1e-12);
  CHECK((maps.enc.b - u).norm() < 1e-12);
  CHECK(maps.dec.W.norm() < 1e-12);
  CHECK((maps.dec.b - q.GB * u).norm() < 1e-12);
}

TEST_CASE("nOPO stationarity via the gradient-descent oracle") {
  LinearProblem p = make_problem(6, 3, 2, 5, 0.0);
  EncDec maps = fit_nopo(p);
  AffineMap enc_gd = gd_affine(p.Y, p.U, 80000, 2e-3);
  CHECK((enc_gd.W - maps.enc.W).norm() < 1e-5);
  CHECK((enc_gd.b - maps.enc.b).norm() < 1e-5);
}

TEST_CASE("mcPOP: lambda=0 reduces to nPOP; Tikhonov decoder equivalence") {
  LinearProblem p = make_problem(7, 4, 3, 10, 0.0);
  EncDec npop = fit_npop(p);
  EncDec mcpop = fit_mcpop(p);
  CHECK((mcpop.dec.W - npop.dec.W).norm() < 1e-10);
  CHECK((mcpop.dec.b - npop.dec.b).norm() < 1e-10);

  p.lambda = 2.5;
  mcpop = fit_mcpop(p);
  // dec(y) solves min 1/2||u - u_mc||^2 + lambda/2||GB u - y||^2 where the
  // quadratic minimizer is computed by solve_spd as the oracle.
  auto cu = center(p.U);
  auto cy = center(p.Y);
  Mat areg = Mat::Identity(4, 4) + p.lambda * p.GB.transpose() * p.GB;
  Mat ypinv = pinv(cy.centered);
  Mat yproj = cy.centered * ypinv;
  const Mat Im = Mat::Identity(3, 3);
  CounterRng rng(70);
  for (int i = 0; i < 5; ++i) {
    Vec y = random_matrix(3, 1, rng).col(0);
    // u_mc written straight from the centering identity, then the quadratic
    // minimizer solved directly by solve_spd as the oracle.
    Vec dy = y - cy.mean;
    Vec u_mc = cu.mean + cu.centered * ypinv * dy -
               p.lambda * p.GB.transpose() * (Im - yproj) * dy;
    Vec oracle = solve_spd(areg, Vec(u_mc + p.lambda * p.GB.transpose() * y));
    CHECK((mcpop.dec(y) - oracle).norm() < 1e-10 * (1.0 + oracle.norm()));
  }
}

TEST_CASE("mcPOP error formula: second term collapses at full row rank") {
  LinearProblem p = make_problem(8, 4, 3, 12, 1.5);
  auto cy = center(p.Y);
  Mat yproj = cy.centered * pinv(cy.centered);
  CHECK((yproj - Mat::Identity(3, 3)).norm() < 1e-8);

  CounterRng rng(80);
  Vec u_test = random_matrix(4, 1, rng).col(0);
  Vec y_test = p.GB * u_test;
  ErrorPrediction pred = predict_test_errors(Approach::mcpop, p, u_test, y_test);

  auto cu = center(p.U);
  Mat areg = Mat::Identity(4, 4) + p.lambda * p.GB.transpose() * p.GB;
  Vec collapsed = solve_spd(
      areg, Mat((cu.centered * pinv(cy.centered) * p.GB -
                 Mat::Identity(4, 4)) *
                (u_test - cu.mean)));
  CHECK(pred.inverse_sq ==
        doctest::Approx(collapsed.squaredNorm()).epsilon(1e-8));
}

TEST_CASE("mcOPO: encoder equals mcPOP decoder; single-sample PtO recovery") {
  LinearProblem p = make_problem(9, 4, 3, 10, 1.2);
  EncDec mcpop = fit_mcpop(p);
  EncDec mcopo = fit_mcopo(p);
  CHECK((mcopo.enc.W - mcpop.dec.W).norm() < 1e-12 * (1.0 + mcpop.dec.W.norm()));
  CHECK((mcopo.enc.b - mcpop.dec.b).norm() < 1e-12 * (1.0 + mcpop.dec.b.norm()));

  // One observation sample made full row rank by randomization.
  LinearProblem s = single_sample_randomized(10, 5, 3, 12, 0.8);
  EncDec maps = fit_mcopo(s);
  CounterRng rng(90);
  for (int i = 0; i < 5; ++i) {
    Vec u = random_matrix(5, 1, rng).col(0);
    Vec want = s.GB * u;
    CHECK((maps.dec(u) - want).norm() <= 1e-8 * want.norm());
  }

  // Degenerate Zbar = 0: lambda = 0 and repeated U.
  LinearProblem d = single_sample_randomized(11, 4, 2, 8, 0.0);
  EncDec dm = fit_mcopo(d);
  CHECK(dm.dec.W.norm() < 1e-10);
}

TEST_CASE("mcOPO-Full: observed rows of the decoder are globally exact") {
  LinearProblem s = single_sample_randomized(12, 5, 3, 14, 0.9);
  CounterRng rng(12);
  Mat rest = random_matrix(4, 5, rng);
  Mat g_full(3 + 4, 5);
  g_full << s.GB, rest;
  s.G_full = g_full;
  EncDec maps = fit_mcopo(s, true);
  for (int i = 0; i < 5; ++i) {
    Vec u = random_matrix(5, 1, rng).col(0);
    Vec state = maps.dec(u);
    CHECK((state.head(3) - s.GB * u).norm() <=
          1e-8 * (1.0 + (s.GB * u).norm()));
    // Full-state exactness on the encoder range.
    Vec z = maps.enc(Vec(s.GB * u + Vec::Constant(3, 0.1)));
    CHECK((maps.dec(z) - g_full * z).norm() <=
          1e-8 * (1.0 + (g_full * z).norm()));
  }
}

TEST_CASE("TAEN: lambda=0 encoder is the constant prior map") {
  LinearProblem p = make_problem(13, 4, 3, 9, 0.0);
  EncDec maps = fit_taen(p);
  CHECK(maps.enc.W.norm() < 1e-12);
  CHECK((maps.enc.b - p.u0).norm() < 1e-12);
}

TEST_CASE("TAEN: Tikhonov equivalence and exact PtO at full row rank") {
  LinearProblem s = single_sample_randomized(14, 5, 3, 15, 1.7);
  s.u0 = Vec::Constant(5, 0.2);
  EncDec maps = fit_taen(s);
  Mat areg = Mat::Identity(5, 5) + s.lambda * s.GB.transpose() * s.GB;
  CounterRng rng(14);
  for (int i = 0; i < 5; ++i) {
    Vec y = random_matrix(3, 1, rng).col(0);
    Vec tikhonov =
        solve_spd(areg, Vec(s.u0 + s.lambda * s.GB.transpose() * y));
    CHECK((maps.enc(y) - tikhonov).norm() <= 1e-10 * (1.0 + tikhonov.norm()));
  }
  for (int i = 0; i < 5; ++i) {
    Vec u = random_matrix(5, 1, rng).col(0);
    Vec want = s.GB * u;
    CHECK((maps.dec(u) - want).norm() <= 1e-8 * want.norm());
  }
}

TEST_CASE("encoder equality chains: mcOPO == mcOPO-Full, TAEN == TAEN-Full") {
  LinearProblem p = make_problem(15, 4, 3, 11, 0.7);
  CounterRng rng(15);
  Mat g_full(5, 4);
  g_full << p.GB, random_matrix(2, 4, rng);
  p.G_full = g_full;
  EncDec a = fit_mcopo(p, false);
  EncDec b = fit_mcopo(p, true);
  CHECK((a.enc.W - b.enc.W).norm() == 0.0);
  CHECK((a.enc.b - b.enc.b).norm() == 0.0);
  EncDec c = fit_taen(p, false);
  EncDec d = fit_taen(p, true);
  CHECK((c.enc.W - d.enc.W).norm() == 0.0);
  CHECK((c.enc.b - d.enc.b).norm() == 0.0);
}

TEST_CASE("stationarity of every fit on 20 seeded problems") {
  for (int seed = 0; seed < 20; ++seed) {
    LinearProblem p = make_problem(100 + seed, 3 + seed % 4, 2 + seed % 3,
                                   8 + seed % 5, 0.2 + 0.15 * seed);
    CounterRng rng(200 + seed);
    Mat g_full(p.m() + 2, p.n());
    g_full << p.GB, random_matrix(2, static_cast<int>(p.n()), rng);
    p.G_full = g_full;
    for (Approach a :
         {Approach::npop, Approach::nopo, Approach::mcpop, Approach::mcopo,
          Approach::mcopo_full, Approach::taen, Approach::taen_full}) {
      EncDec maps = fit(a, p);
      PhaseGradients g = sequential_loss_gradients(a, p, maps);
      CAPTURE(approach_name(a));
      CAPTURE(seed);
      CHECK(g.max_relative() <= 1e-8);
    }
  }
}

TEST_CASE("orthogonality identity of the nPOP decoder misfit") {
  LinearProblem p = make_problem(16, 4, 2, 9, 0.0);
  EncDec maps = fit_npop(p);
  Mat misfit = (maps.dec(p.Y) - p.U) * p.Y.transpose();
  const double scale = 1.0 + p.U.norm() * p.Y.norm();
  CHECK(misfit.norm() <= 1e-8 * scale);
}

TEST_CASE("right-inverse identity of the nPOP decoder") {
  LinearProblem p = make_problem(17, 3, 2, 9, 0.0);
  EncDec maps = fit_npop(p);
  CounterRng rng(17);
  for (int i = 0; i < 5; ++i) {
    Vec y = random_matrix(2, 1, rng).col(0);
    CHECK((p.GB * maps.dec(y) - y).norm() <= 1e-8 * (1.0 + y.norm()));
  }
}

TEST_CASE("predict_test_errors: trivial zeros") {
  LinearProblem p = make_problem(18, 4, 3, 10, 1.1);
  auto cu = center(p.U);
  Vec u_mean = cu.mean;
  ErrorPrediction at_mean =
      predict_test_errors(Approach::npop, p, u_mean, p.GB * u_mean);
  CHECK(at_mean.inverse_sq < 1e-16 * (1.0 + u_mean.squaredNorm()));

  LinearProblem s = single_sample_randomized(19, 4, 3, 12, 1.3);
  s.u0 = Vec::Constant(4, -0.3);
  ErrorPrediction at_prior =
      predict_test_errors(Approach::taen, s, s.u0, s.GB * s.u0);
  CHECK(at_prior.inverse_sq < 1e-14);
  CHECK(*at_prior.taen_bound < 1e-16);
}

TEST_CASE("predicted errors equal the actual map errors") {
  for (int seed = 0; seed < 5; ++seed) {
    LinearProblem p = make_problem(300 + seed, 4, 3, 9, 0.5 + 0.3 * seed);
    CounterRng rng(400 + seed);
    for (Approach a : {Approach::npop, Approach::nopo, Approach::mcpop,
                       Approach::mcopo, Approach::taen}) {
      EncDec maps = fit(a, p);
      Vec u_test = random_matrix(4, 1, rng).col(0);
      Vec y_test = p.GB * u_test;
      ErrorPrediction pred = predict_test_errors(a, p, u_test, y_test);
      const bool pto_first = (a == Approach::npop || a == Approach::mcpop);
      Vec u_hat = pto_first ? maps.dec(y_test) : maps.enc(y_test);
      Vec y_hat = pto_first ? maps.enc(u_test) : maps.dec(u_test);
      CAPTURE(approach_name(a));
      CAPTURE(seed);
      CHECK(pred.inverse_sq ==
            doctest::Approx((u_hat - u_test).squaredNorm())
                .epsilon(1e-8)
                .scale(1.0 + u_test.squaredNorm()));
      CHECK(pred.forward_sq ==
            doctest::Approx((y_hat - y_test).squaredNorm())
                .epsilon(1e-8)
                .scale(1.0 + y_test.squaredNorm()));
    }
  }
}

TEST_CASE("Monte-Carlo error agreement over 1000 fresh pairs") {
  LinearProblem p = make_problem(20, 4, 3, 10, 0.9);
  EncDec maps = fit_taen(p);
  CounterRng rng(20);
  const int trials = 1000;
  Vec diffs(trials);
  double emp_mean = 0.0, pred_mean = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec u = random_matrix(4, 1, rng).col(0);
    Vec y = p.GB * u;
    const double emp = (maps.enc(y) - u).squaredNorm();
    const double pred =
        predict_test_errors(Approach::taen, p, u, y).inverse_sq;
    diffs(t) = emp - pred;
    emp_mean += emp;
    pred_mean += pred;
  }
  emp_mean /= trials;
  pred_mean /= trials;
  const double sd = std::sqrt((diffs.array() - diffs.mean()).square().sum() /
                              (trials - 1));
  CHECK(std::abs(emp_mean - pred_mean) <=
        3.0 * sd / std::sqrt(double(trials)) + 1e-12);
}

TEST_CASE("simultaneous residuals at the beta=1 sequential optimum") {
  // Stationarity of the joint loss at the sequential solution needs
  // rank(GB Ubar) = rank(Ubar): use a full-column-rank PtO map.
  LinearProblem p = make_problem(21, 3, 0, 9, 0.0, /*tall_gb=*/true);
  EncDec maps = fit_npop(p);
  ResidualBundle r = simultaneous_residual(maps.enc, maps.dec, p, 1.0);
  CHECK(r.max_relative() <= 1e-8);
}

TEST_CASE("simultaneous residuals are positive at a random point") {
  LinearProblem p = make_problem(22, 3, 2, 7, 0.0);
  CounterRng rng(22);
  AffineMap enc{random_matrix(2, 3, rng), random_matrix(2, 1, rng).col(0)};
  AffineMap dec{random_matrix(3, 2, rng), random_matrix(3, 1, rng).col(0)};
  ResidualBundle r = simultaneous_residual(enc, dec, p, 1.0);
  CHECK(r.grad_We > 1e-6);
  CHECK(r.grad_Wd > 1e-6);
}

TEST_CASE("simultaneous gradient descent reaches a stationary point") {
  LinearProblem p = make_problem(23, 3, 2, 6, 0.0);
  const double beta = 1.0;
  CounterRng rng(23);
  AffineMap enc{0.1 * random_matrix(2, 3, rng), Vec::Zero(2)};
  AffineMap dec{0.1 * random_matrix(3, 2, rng), Vec::Zero(3)};
  const Vec ones = Vec::Ones(6);
  const double lr = 2e-3;
  for (int it = 0; it < 300000; ++it) {
    Mat z = enc(p.U);
    Mat re = z - p.Y;
    Mat rd = dec(z) - p.U;
    Mat dWd = beta * rd * z.transpose();
    Vec dbd = beta * rd * ones;
    Mat pulled = re + beta * dec.W.transpose() * rd;
    Mat dWe = pulled * p.U.transpose();
    Vec dbe = pulled * ones;
    enc.W -= lr * dWe;
    enc.b -= lr * dbe;
    dec.W -= lr * dWd;
    dec.b -= lr * dbd;
  }
  ResidualBundle r = simultaneous_residual(enc, dec, p, beta);
  CHECK(r.max_relative() <= 1e-6);
}

TEST_CASE("nOPO-layout simultaneous residual at its sequential optimum") {
  // Same rank condition, now on the inverse map: use square invertible GB
  // so rank(Ubar Ybar-projection) matches.
  CounterRng rng(24);
  LinearProblem p;
  Mat g = random_matrix(4, 4, rng);
  p.GB = g + 4.0 * Mat::Identity(4, 4);  // well-conditioned square map
  p.U = random_matrix(4, 9, rng);
  p.Y = p.GB * p.U;
  p.u0 = Vec::Zero(4);
  EncDec maps = fit_nopo(p);
  ResidualBundle r =
      simultaneous_residual(maps.enc, maps.dec, p, 1.0, true);
  CHECK(r.max_relative() <= 1e-8);
}

TEST_CASE("unknown approach name raises a usage error") {
  CHECK_THROWS_AS((void)approach_from_string("tnet"), DimensionError);
}
