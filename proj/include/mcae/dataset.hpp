#ifndef MCAE_DATASET_HPP
#define MCAE_DATASET_HPP

#include <string>
#include <vector>

#include "mcae/config.hpp"
#include "mcae/random_field.hpp"

namespace mcae {

// Paired parameter/observation data for one experiment, persisted as binary
// matrix blobs plus a JSON manifest. Y is the delta-corrupted copy of
// Y_clean and is reproducible from the stored seeds.
struct Dataset {
  Mat U_train, Yc_train, Y_train;
  Mat U_test, Yc_test, Y_test;
  std::vector<int> obs_indices;
  KLBasis basis;
  std::string problem;  // heat | ns | linear
  double delta = 0.0;
  ExperimentConfig::Seeds seeds;
  std::string kl_hash;

  Eigen::Index n() const { return U_train.rows(); }
  Eigen::Index m() const { return Y_train.rows(); }
};

/// FNV-1a over the serialized eigenvalues and modes; provenance check.
std::string kl_basis_hash(const KLBasis& basis);

void save_dataset(const std::string& dir, const Dataset& ds);

/// Loads and re-verifies the KL hash; mismatch raises IoError.
Dataset load_dataset(const std::string& dir);

}  // namespace mcae

#endif
