#ifndef MCAE_TRAINING_HPP
#define MCAE_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcae/forward_model.hpp"
#include "mcae/linear_analysis.hpp"
#include "mcae/rng.hpp"
#include "mcae/shallow_net.hpp"

namespace mcae {

class TrainingError : public std::runtime_error {
public:
  TrainingError(const std::string& msg, int epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_ = -1;
};

enum class Phase { encoder, decoder };

struct TrainSpec {
  Approach approach = Approach::taen;
  Phase phase = Phase::encoder;
  double lambda = 1.0;
  double epsilon = 0.0;
  int epochs = 0;
  double lr = 1e-3;
  int batch = 0;  // 0 = full batch (= n_t); mini-batching is out of scope
  std::uint64_t seed = 100;
  int hidden = 512;
  double weight_std = 0.14142135623730951;  // sqrt(0.02)
  bool identity_activation = false;         // test mode only
  int eval_every = 0;        // 0 disables periodic test evaluation
  int plateau_epochs = 0;    // 0 disables plateau stopping

  void validate(Eigen::Index n_t) const;
};

struct TrainData {
  Mat U;   // n x n_t ground-truth PoIs (unused by TAEN losses)
  Mat Y;   // m x n_t corrupted observations
  Vec u0;  // prior mean, required by TAEN variants
};

struct LossGrad {
  double loss = 0.0;
  NetGrads grads;
};

/// Phase loss and exact reverse-mode gradients for the net being trained
/// (encoder phase: enc; decoder phase: dec against the frozen enc).
/// Observation inputs are re-randomized per call for the randomizing
/// approaches; rng is consumed via substreams only, so identical rng state
/// reproduces the draw.
LossGrad loss_and_grad(const TrainSpec& spec, const ShallowNet& enc,
                       const ShallowNet* dec, const TrainData& data,
                       const ForwardModel& fm, const CounterRng& rng);

struct AdamState {
  Mat mW1, vW1, mW2, vW2;
  Vec mb1, vb1, mb2, vb2;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(const ShallowNet& net);
};

/// Standard ADAM update with bias correction, in place.
void adam_step(AdamState& state, ShallowNet& net, const NetGrads& grads,
               double lr);

struct EvalHook {
  std::function<double(const ShallowNet&)> metric;  // lower is better
};

struct PhaseHistory {
  std::vector<double> loss;  // one entry per epoch
  std::vector<std::pair<int, double>> test_metric;
  int epochs_run = 0;
  std::string stop_reason = "fixed-budget";
  double seconds = 0.0;
};

/// Train one phase with ADAM. For the decoder phase pass the frozen encoder;
/// it is never modified.
PhaseHistory train_phase(ShallowNet& net, const ShallowNet* frozen_enc,
                         const TrainSpec& spec, const TrainData& data,
                         const ForwardModel& fm, const CounterRng& rng,
                         const EvalHook* hook = nullptr);

struct TrainResult {
  ShallowNet enc;
  ShallowNet dec;
  PhaseHistory enc_history;
  PhaseHistory dec_history;
};

/// Dimensions of the encoder/decoder for an approach given (n, m, p).
struct NetShape {
  Eigen::Index enc_in, enc_out, dec_in, dec_out;
};
NetShape net_shape(Approach a, Eigen::Index n, Eigen::Index m, Eigen::Index p);

/// Two-phase sequential protocol: phase 1 trains the encoder, phase 2 the
/// decoder against the frozen encoder, with per-epoch re-randomization.
TrainResult train_sequential(const TrainSpec& enc_spec,
                             const TrainSpec& dec_spec, const TrainData& data,
                             const ForwardModel& fm, const CounterRng& rng,
                             const EvalHook* enc_hook = nullptr,
                             const EvalHook* dec_hook = nullptr);

// Versioned little-endian checkpoint: both nets, ADAM states, rng cursor.
struct Checkpoint {
  ShallowNet enc;
  ShallowNet dec;
  AdamState adam_enc;
  AdamState adam_dec;
  std::uint64_t rng_seed = 0;
  std::uint64_t rng_counter = 0;
  std::int32_t epochs_enc = 0;
  std::int32_t epochs_dec = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mcae

#endif
