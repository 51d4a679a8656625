#ifndef MCAE_CONFIG_HPP
#define MCAE_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcae {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Declarative experiment description. JSON schema is strict: unknown keys
// are rejected. Configs ship in pairs (configs/*.desk.json at laptop scale,
// configs/*.paper.json at publication scale).
struct ExperimentConfig {
  std::string problem = "heat";  // heat | ns | linear
  std::string approach = "TAEN";
  int n_train = 1;       // 1 or 100
  int replicate = 100;   // single-sample case: copies per batch
  int n_test = 500;
  double lambda = 1.0;
  double delta = 0.005;
  double epsilon = 0.1;
  int width = 512;
  int epochs_encoder = 4000;
  int epochs_decoder = 2000;
  double lr = 1e-3;
  int eval_every = 0;
  int plateau_epochs = 0;

  struct Seeds {
    std::uint64_t net = 100;
    std::uint64_t train = 18;
    std::uint64_t test = 28;
    std::uint64_t noise = 7;
    std::uint64_t obs = 5;
  } seeds;

  struct Heat {
    int nx = 16;
    int ny = 16;
    int q = 15;
    double corr_length = 0.5;
    double source = 20.0;
    int num_obs = 10;
  } heat;

  struct Ns {
    int grid = 16;
    int steps = 100;
    double dt = 0.1;
    double nu = 1e-3;
    int q = 24;
    int num_obs = 20;
  } ns;

  struct Sweep {
    std::vector<double> epsilons;
    int num_samples = 5;
  } sweep;

  std::string out = "out";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

}  // namespace mcae

#endif
