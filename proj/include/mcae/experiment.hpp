#ifndef MCAE_EXPERIMENT_HPP
#define MCAE_EXPERIMENT_HPP

#include <memory>
#include <string>

#include "mcae/dataset.hpp"
#include "mcae/forward_model.hpp"
#include "mcae/metrics.hpp"
#include "mcae/tikhonov.hpp"
#include "mcae/training.hpp"

namespace mcae {

inline constexpr const char* kCodeVersion = "mcae 1.0.0";

/// Observation sites: seeded draw without replacement over interior nodes
/// (heat) or all nodes (periodic ns), persisted with the dataset.
std::vector<int> choose_observation_sites(const ExperimentConfig& cfg);

std::unique_ptr<ForwardModel> make_forward_model(
    const ExperimentConfig& cfg, const std::vector<int>& obs_indices);

/// Draws train/test fields, solves the forward problem for clean
/// observations, applies delta-corruption. Deterministic under the seeds.
Dataset generate_dataset(const ExperimentConfig& cfg);

/// Case I (n_train = 1): the sample at sample_index replicated `replicate`
/// times; case II: the full training set.
TrainData make_train_data(const ExperimentConfig& cfg, const Dataset& ds,
                          int sample_index = 0);

TrainSpec encoder_spec(const ExperimentConfig& cfg);
TrainSpec decoder_spec(const ExperimentConfig& cfg);

struct MapEval {
  Vec inverse_per_sample;  // squared relative errors
  Vec forward_per_sample;
  double inverse_mean = 0.0;
  double forward_mean = 0.0;
  Vec abs_pointwise;  // on the inverse field
};

/// Test-set metrics of trained surrogates. Forward predictions are compared
/// against clean observations; full-state decoders are observed through B.
MapEval evaluate_surrogates(Approach a, const ShallowNet& enc,
                            const ShallowNet& dec, const Dataset& ds,
                            const ForwardModel& fm);

struct TikEval {
  Vec per_sample;  // squared relative inverse errors
  double mean = 0.0;
  double seconds_per_sample = 0.0;
  double mean_iters = 0.0;
};

/// Per-sample Tikhonov reference over the test set (sample-parallel).
/// max_samples = 0 solves the whole test set.
TikEval run_tikhonov_reference(const ExperimentConfig& cfg, const Dataset& ds,
                               const ForwardModel& fm, int max_samples = 0,
                               const TikOptions& opts = {});

struct Report {
  std::string kind;
  std::string approach;
  Vec inverse_per_sample;
  Vec forward_per_sample;
  double inverse_mean = 0.0;
  double forward_mean = 0.0;
  Vec abs_pointwise;
  double train_seconds = 0.0;
  double per_inference_seconds = 0.0;
  long cfl_warnings = 0;
  std::string config_echo;
  std::string code_version = kCodeVersion;
};

void save_report(const std::string& dir, const std::string& name,
                 const Report& report);
/// Reload with a self-consistency check: stored means must equal the means
/// of the persisted per-sample arrays.
Report load_report(const std::string& path);

// CLI entry points. Return 0 on success/PASS, 2 on acceptance-style
// failure, raise on usage/runtime errors.
int cmd_generate(const ExperimentConfig& cfg, bool quiet);
int cmd_train(const ExperimentConfig& cfg, bool quiet);
int cmd_eval(const ExperimentConfig& cfg, bool quiet);
int cmd_tik(const ExperimentConfig& cfg, bool quiet);
int cmd_oracle(const ExperimentConfig& cfg, bool quiet);
int cmd_sweep(const ExperimentConfig& cfg, const std::string& mode,
              bool quiet);
int cmd_timing(const ExperimentConfig& cfg, bool quiet);

}  // namespace mcae

#endif
