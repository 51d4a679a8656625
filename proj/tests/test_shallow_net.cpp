#include <cmath>

#include "doctest.h"
#include "mcae/shallow_net.hpp"

using namespace mcae;

namespace {

Mat random_matrix(int rows, int cols, CounterRng& rng) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("zero first layer gives a constant output") {
  CounterRng rng(1);
  ShallowNet net = ShallowNet::init(3, 4, 2, 0.1, rng);
  net.W1.setZero();
  net.b1.setZero();
  net.b2 << 1.5, -0.5;
  Mat x = random_matrix(3, 6, rng);
  Mat out = net_forward(net, x);
  for (int i = 0; i < 6; ++i) {
    CHECK((out.col(i) - net.b2).norm() == 0.0);
  }
}

TEST_CASE("single ReLU unit passes positive input through") {
  CounterRng rng(2);
  ShallowNet net = ShallowNet::init(1, 1, 1, 0.1, rng);
  net.W1(0, 0) = 1.0;
  net.b1(0) = 0.0;
  net.W2(0, 0) = 1.0;
  net.b2(0) = 0.0;
  Mat x(1, 3);
  x << 0.5, 2.0, 7.0;
  CHECK((net_forward(net, x) - x).norm() == 0.0);
}

TEST_CASE("forward matches a straight-line re-evaluation") {
  CounterRng rng(3);
  ShallowNet net = ShallowNet::init(4, 6, 3, 0.3, rng);
  Mat x = random_matrix(4, 5, rng);
  Mat out = net_forward(net, x);
  for (int i = 0; i < 5; ++i) {
    Vec pre = net.W1 * x.col(i) + net.b1;
    Vec hidden(6);
    for (int h = 0; h < 6; ++h) hidden(h) = pre(h) > 0.0 ? pre(h) : 0.0;
    Vec expected = net.W2 * hidden + net.b2;
    CHECK((out.col(i) - expected).norm() < 1e-14 * (1.0 + expected.norm()));
  }
}

TEST_CASE("identity activation composes an affine map") {
  CounterRng rng(4);
  ShallowNet net = ShallowNet::init(3, 5, 2, 0.4, rng);
  net.identity_activation = true;
  Mat x = random_matrix(3, 4, rng);
  Mat expected =
      ((net.W2 * net.W1) * x).colwise() + (net.W2 * net.b1 + net.b2);
  CHECK((net_forward(net, x) - expected).norm() < 1e-13);
}

TEST_CASE("backward matches finite differences of a quadratic loss") {
  CounterRng rng(5);
  ShallowNet net = ShallowNet::init(3, 4, 2, 0.5, rng);
  Mat x = random_matrix(3, 4, rng);
  Mat target = random_matrix(2, 4, rng);

  auto loss = [&](const ShallowNet& n) {
    return 0.5 * (net_forward(n, x) - target).squaredNorm();
  };
  NetCache cache;
  Mat out = net_forward_cached(net, x, cache);
  NetGrads g = net_backward(net, cache, out - target);

  const double h = 1e-6;
  auto check_entry = [&](double& entry, double grad) {
    const double save = entry;
    entry = save + h;
    const double plus = loss(net);
    entry = save - h;
    const double minus = loss(net);
    entry = save;
    const double fd = (plus - minus) / (2.0 * h);
    CHECK(grad == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  };
  for (int r = 0; r < net.W1.rows(); ++r) {
    for (int c = 0; c < net.W1.cols(); ++c) {
      check_entry(net.W1(r, c), g.dW1(r, c));
    }
  }
  for (int r = 0; r < net.W2.rows(); ++r) {
    for (int c = 0; c < net.W2.cols(); ++c) {
      check_entry(net.W2(r, c), g.dW2(r, c));
    }
  }
  for (int r = 0; r < net.b1.size(); ++r) check_entry(net.b1(r), g.db1(r));
  for (int r = 0; r < net.b2.size(); ++r) check_entry(net.b2(r), g.db2(r));
}

TEST_CASE("seeded init is deterministic") {
  CounterRng a(7), b(7);
  ShallowNet n1 = ShallowNet::init(3, 4, 2, 0.2, a);
  ShallowNet n2 = ShallowNet::init(3, 4, 2, 0.2, b);
  CHECK((n1.W1 - n2.W1).norm() == 0.0);
  CHECK((n1.W2 - n2.W2).norm() == 0.0);
  CHECK(n1.b1.norm() == 0.0);
}
