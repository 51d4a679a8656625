#ifndef MCAE_FORWARD_MODEL_HPP
#define MCAE_FORWARD_MODEL_HPP

#include <vector>

#include "mcae/linalg.hpp"

namespace mcae {

/// Pure selection: out_i = state[idx_i]. Empty index lists are allowed.
Vec observe(const Vec& state, const std::vector<int>& obs_indices);

/// Adjoint of observe: scatter cot into a zero state vector.
Vec scatter_observation(const Vec& cot_obs, const std::vector<int>& obs_indices,
                        int state_dim);

// Differentiable forward map G: R^n -> R^p with an observation selector B.
// vjp(u, c) must be the exact transpose-linearization of apply at u; every
// implementation is validated against central finite differences.
class ForwardModel {
public:
  virtual ~ForwardModel() = default;

  virtual int param_dim() const = 0;  // n
  virtual int state_dim() const = 0;  // p

  virtual Vec apply(const Vec& u) const = 0;
  virtual Vec vjp(const Vec& u, const Vec& cot_state) const = 0;

  const std::vector<int>& obs_indices() const { return obs_indices_; }
  int obs_dim() const { return static_cast<int>(obs_indices_.size()); }

  /// B o G
  Vec apply_observed(const Vec& u) const {
    return observe(apply(u), obs_indices_);
  }

  /// (B o G)^T action: vjp(u, B^T cot).
  Vec vjp_observed(const Vec& u, const Vec& cot_obs) const {
    return vjp(u, scatter_observation(cot_obs, obs_indices_, state_dim()));
  }

protected:
  void set_obs_indices(std::vector<int> idx);

  std::vector<int> obs_indices_;
};

/// Wraps an explicit matrix G as a ForwardModel: apply(u) = G u,
/// vjp(u, c) = G^T c. The workhorse of every closed-form oracle test.
class LinearSurrogate final : public ForwardModel {
public:
  LinearSurrogate(Mat g, std::vector<int> obs_indices);

  int param_dim() const override { return static_cast<int>(g_.cols()); }
  int state_dim() const override { return static_cast<int>(g_.rows()); }

  Vec apply(const Vec& u) const override;
  Vec vjp(const Vec& u, const Vec& cot_state) const override;

  const Mat& matrix() const { return g_; }
  /// Rows of G selected by the observation operator, i.e. G^B = B G.
  Mat observed_matrix() const;

private:
  Mat g_;
};

}  // namespace mcae

#endif
