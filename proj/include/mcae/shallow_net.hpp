#ifndef MCAE_SHALLOW_NET_HPP
#define MCAE_SHALLOW_NET_HPP

#include "mcae/linalg.hpp"
#include "mcae/rng.hpp"

namespace mcae {

// One-hidden-layer network: forward(x) = W2 act(W1 x + b1) + b2 with ReLU
// activation. identity_activation bypasses the ReLU so the composite map is
// affine; it exists only so linear-oracle equivalence is testable and is not
// reachable from user-facing configs.
struct ShallowNet {
  Mat W1;
  Vec b1;
  Mat W2;
  Vec b2;
  bool identity_activation = false;

  Eigen::Index in_dim() const { return W1.cols(); }
  Eigen::Index hidden_dim() const { return W1.rows(); }
  Eigen::Index out_dim() const { return W2.rows(); }

  static ShallowNet init(Eigen::Index in, Eigen::Index hidden,
                         Eigen::Index out, double weight_std, CounterRng& rng);
};

/// Columnwise forward pass.
Mat net_forward(const ShallowNet& net, const Mat& x);

struct NetCache {
  Mat x;
  Mat pre;     // W1 x + b1
  Mat hidden;  // act(pre)
};

Mat net_forward_cached(const ShallowNet& net, const Mat& x, NetCache& cache);

struct NetGrads {
  Mat dW1;
  Vec db1;
  Mat dW2;
  Vec db2;

  static NetGrads zeros_like(const ShallowNet& net);
  double squared_norm() const;
};

/// Reverse pass: gradients of sum_i <d_out_i, forward(x_i)> w.r.t. the
/// parameters, given the cached forward quantities.
NetGrads net_backward(const ShallowNet& net, const NetCache& cache,
                      const Mat& d_out);

}  // namespace mcae

#endif
