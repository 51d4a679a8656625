#include "mcae/shallow_net.hpp"

namespace mcae {

ShallowNet ShallowNet::init(Eigen::Index in, Eigen::Index hidden,
                            Eigen::Index out, double weight_std,
                            CounterRng& rng) {
  ShallowNet net;
  net.W1 = Mat(hidden, in);
  net.W2 = Mat(out, hidden);
  net.b1 = Vec::Zero(hidden);
  net.b2 = Vec::Zero(out);
  // Row-major fill order is part of the determinism contract.
  for (Eigen::Index r = 0; r < hidden; ++r) {
    for (Eigen::Index c = 0; c < in; ++c) {
      net.W1(r, c) = weight_std * rng.normal();
    }
  }
  for (Eigen::Index r = 0; r < out; ++r) {
    for (Eigen::Index c = 0; c < hidden; ++c) {
      net.W2(r, c) = weight_std * rng.normal();
    }
  }
  return net;
}

Mat net_forward(const ShallowNet& net, const Mat& x) {
  NetCache cache;
  return net_forward_cached(net, x, cache);
}

Mat net_forward_cached(const ShallowNet& net, const Mat& x, NetCache& cache) {
  if (x.rows() != net.in_dim()) {
    throw DimensionError("net_forward: input dimension mismatch");
  }
  cache.x = x;
  cache.pre = (net.W1 * x).colwise() + net.b1;
  cache.hidden =
      net.identity_activation ? cache.pre : cache.pre.cwiseMax(0.0);
  return (net.W2 * cache.hidden).colwise() + net.b2;
}

NetGrads NetGrads::zeros_like(const ShallowNet& net) {
  NetGrads g;
  g.dW1 = Mat::Zero(net.W1.rows(), net.W1.cols());
  g.db1 = Vec::Zero(net.b1.size());
  g.dW2 = Mat::Zero(net.W2.rows(), net.W2.cols());
  g.db2 = Vec::Zero(net.b2.size());
  return g;
}

double NetGrads::squared_norm() const {
  return dW1.squaredNorm() + db1.squaredNorm() + dW2.squaredNorm() +
         db2.squaredNorm();
}

NetGrads net_backward(const ShallowNet& net, const NetCache& cache,
                      const Mat& d_out) {
  NetGrads g;
  g.dW2 = d_out * cache.hidden.transpose();
  g.db2 = d_out.rowwise().sum();
  Mat d_hidden = net.W2.transpose() * d_out;
  if (!net.identity_activation) {
    d_hidden = (cache.pre.array() > 0.0).select(d_hidden, 0.0);
  }
  g.dW1 = d_hidden * cache.x.transpose();
  g.db1 = d_hidden.rowwise().sum();
  return g;
}

}  // namespace mcae
