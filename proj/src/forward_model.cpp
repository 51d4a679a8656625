#include "mcae/forward_model.hpp"

namespace mcae {

Vec observe(const Vec& state, const std::vector<int>& obs_indices) {
  Vec out(obs_indices.size());
  for (std::size_t i = 0; i < obs_indices.size(); ++i) {
    const int idx = obs_indices[i];
    if (idx < 0 || idx >= state.size()) {
      throw DimensionError("observe: index " + std::to_string(idx) +
                           " out of range for state of size " +
                           std::to_string(state.size()));
    }
    out(static_cast<Eigen::Index>(i)) = state(idx);
  }
  return out;
}

Vec scatter_observation(const Vec& cot_obs, const std::vector<int>& obs_indices,
                        int state_dim) {
  if (cot_obs.size() != static_cast<Eigen::Index>(obs_indices.size())) {
    throw DimensionError("scatter_observation: cotangent size mismatch");
  }
  Vec out = Vec::Zero(state_dim);
  for (std::size_t i = 0; i < obs_indices.size(); ++i) {
    const int idx = obs_indices[i];
    if (idx < 0 || idx >= state_dim) {
      throw DimensionError("scatter_observation: index out of range");
    }
    out(idx) += cot_obs(static_cast<Eigen::Index>(i));
  }
  return out;
}

void ForwardModel::set_obs_indices(std::vector<int> idx) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= state_dim()) {
      throw DimensionError("obs index out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (idx[j] == idx[i]) {
        throw DimensionError("obs indices must be distinct");
      }
    }
  }
  obs_indices_ = std::move(idx);
}

LinearSurrogate::LinearSurrogate(Mat g, std::vector<int> obs_indices)
    : g_(std::move(g)) {
  require_finite(g_, "LinearSurrogate");
  set_obs_indices(std::move(obs_indices));
}

Vec LinearSurrogate::apply(const Vec& u) const {
  if (u.size() != g_.cols()) {
    throw DimensionError("LinearSurrogate::apply: dimension mismatch");
  }
  return g_ * u;
}

Vec LinearSurrogate::vjp(const Vec& u, const Vec& cot_state) const {
  if (u.size() != g_.cols() || cot_state.size() != g_.rows()) {
    throw DimensionError("LinearSurrogate::vjp: dimension mismatch");
  }
  return g_.transpose() * cot_state;
}

Mat LinearSurrogate::observed_matrix() const {
  Mat gb(obs_indices_.size(), g_.cols());
  for (std::size_t i = 0; i < obs_indices_.size(); ++i) {
    gb.row(static_cast<Eigen::Index>(i)) = g_.row(obs_indices_[i]);
  }
  return gb;
}

}  // namespace mcae
