#include "mcae/training.hpp"

#include <chrono>
#include <cmath>

#include "mcae/blob_io.hpp"
#include "mcae/parallel.hpp"
#include "mcae/random_field.hpp"

namespace mcae {

void TrainSpec::validate(Eigen::Index n_t) const {
  if (lambda < 0.0) throw DimensionError("TrainSpec: negative lambda");
  if (epsilon < 0.0) throw DimensionError("TrainSpec: negative epsilon");
  if (epsilon > 0.0 && !approach_randomizes(approach)) {
    throw DimensionError("TrainSpec: " + approach_name(approach) +
                         " does not use data randomization; epsilon must be 0");
  }
  if (epochs < 0) throw DimensionError("TrainSpec: negative epochs");
  if (lr <= 0.0) throw DimensionError("TrainSpec: nonpositive learning rate");
  if (batch != 0 && batch != n_t) {
    throw DimensionError("TrainSpec: mini-batching unsupported (batch = n_t)");
  }
  if (hidden < 1) throw DimensionError("TrainSpec: hidden width < 1");
}

namespace {

Mat randomized_inputs(const TrainSpec& spec, const Mat& y,
                      const CounterRng& rng) {
  if (!approach_randomizes(spec.approach)) return y;
  Mat out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    CounterRng col = rng.stream(static_cast<std::uint64_t>(i));
    out.col(i) = randomize(y.col(i), spec.epsilon, col);
  }
  return out;
}

// Adds the lambda-weighted model-constrained term for net outputs O against
// targets T_obs: loss += lambda/2 sum_i ||BG(o_i) - t_i||^2, and the matching
// vjp contribution into Delta. One solve and one vjp per column.
void add_model_constrained_term(const ForwardModel& fm, double lambda,
                                const Mat& O, const Mat& T_obs, Mat& Delta,
                                double& loss) {
  const int cols = static_cast<int>(O.cols());
  Vec per_col_loss = Vec::Zero(cols);
  parallel_for(cols, [&](int i) {
    const Vec o = O.col(i);
    const Vec s = fm.apply_observed(o) - T_obs.col(i);
    per_col_loss(i) = 0.5 * lambda * s.squaredNorm();
    Delta.col(i) += lambda * fm.vjp_observed(o, s);
  });
  loss += per_col_loss.sum();
}

// Forward-model targets for the decoder phase of the model-constrained
// inverse-PtO approaches: one solve per column, shared by loss and gradient.
Mat solver_targets(const ForwardModel& fm, const Mat& Z, bool full_state) {
  Mat T(full_state ? fm.state_dim() : fm.obs_dim(), Z.cols());
  parallel_for(static_cast<int>(Z.cols()), [&](int i) {
    T.col(i) =
        full_state ? fm.apply(Z.col(i)) : fm.apply_observed(Z.col(i));
  });
  return T;
}

}  // namespace

LossGrad loss_and_grad(const TrainSpec& spec, const ShallowNet& enc,
                       const ShallowNet* dec, const TrainData& data,
                       const ForwardModel& fm, const CounterRng& rng) {
  spec.validate(data.U.cols());
  const bool pto_first =
      spec.approach == Approach::npop || spec.approach == Approach::mcpop;
  const bool full = approach_is_full(spec.approach);

  LossGrad out;
  if (spec.phase == Phase::encoder) {
    const Mat x = pto_first ? data.U : randomized_inputs(spec, data.Y, rng);
    NetCache cache;
    Mat o = net_forward_cached(enc, x, cache);
    Mat delta;
    switch (spec.approach) {
      case Approach::npop:
      case Approach::mcpop:
        delta = o - data.Y;
        break;
      case Approach::nopo:
        delta = o - data.U;
        break;
      case Approach::mcopo:
      case Approach::mcopo_full:
        delta = o - data.U;
        break;
      case Approach::taen:
      case Approach::taen_full:
        if (data.u0.size() != o.rows()) {
          throw DimensionError("loss_and_grad: u0 required for TAEN");
        }
        delta = o.colwise() - data.u0;
        break;
    }
    out.loss = 0.5 * delta.squaredNorm();
    if (approach_randomizes(spec.approach)) {
      add_model_constrained_term(fm, spec.lambda, o, x, delta, out.loss);
    }
    out.grads = net_backward(enc, cache, delta);
  } else {
    if (dec == nullptr) {
      throw DimensionError("loss_and_grad: decoder phase without decoder");
    }
    Mat z;
    if (pto_first) {
      z = net_forward(enc, data.U);
    } else if (spec.approach == Approach::nopo) {
      z = net_forward(enc, data.Y);
    } else {
      z = net_forward(enc, randomized_inputs(spec, data.Y, rng));
    }
    NetCache cache;
    Mat d = net_forward_cached(*dec, z, cache);
    Mat delta;
    switch (spec.approach) {
      case Approach::npop:
        delta = d - data.U;
        out.loss = 0.5 * delta.squaredNorm();
        break;
      case Approach::nopo:
        delta = d - data.Y;
        out.loss = 0.5 * delta.squaredNorm();
        break;
      case Approach::mcpop:
        delta = d - data.U;
        out.loss = 0.5 * delta.squaredNorm();
        add_model_constrained_term(fm, spec.lambda, d, data.Y, delta,
                                   out.loss);
        break;
      default: {
        Mat t = solver_targets(fm, z, full);
        delta = d - t;
        out.loss = 0.5 * delta.squaredNorm();
        break;
      }
    }
    out.grads = net_backward(*dec, cache, delta);
  }
  if (!std::isfinite(out.loss)) {
    throw TrainingError("loss_and_grad: non-finite loss", -1);
  }
  return out;
}

AdamState AdamState::init(const ShallowNet& net) {
  AdamState s;
  s.mW1 = Mat::Zero(net.W1.rows(), net.W1.cols());
  s.vW1 = s.mW1;
  s.mW2 = Mat::Zero(net.W2.rows(), net.W2.cols());
  s.vW2 = s.mW2;
  s.mb1 = Vec::Zero(net.b1.size());
  s.vb1 = s.mb1;
  s.mb2 = Vec::Zero(net.b2.size());
  s.vb2 = s.mb2;
  return s;
}

namespace {

template <typename T>
void adam_update(T& param, T& m, T& v, const T& g, double lr, double b1,
                 double b2, double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  param -=
      (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
}

}  // namespace

void adam_step(AdamState& s, ShallowNet& net, const NetGrads& g, double lr) {
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  adam_update(net.W1, s.mW1, s.vW1, g.dW1, lr, s.beta1, s.beta2, s.eps, bc1,
              bc2);
  adam_update(net.b1, s.mb1, s.vb1, g.db1, lr, s.beta1, s.beta2, s.eps, bc1,
              bc2);
  adam_update(net.W2, s.mW2, s.vW2, g.dW2, lr, s.beta1, s.beta2, s.eps, bc1,
              bc2);
  adam_update(net.b2, s.mb2, s.vb2, g.db2, lr, s.beta1, s.beta2, s.eps, bc1,
              bc2);
}

PhaseHistory train_phase(ShallowNet& net, const ShallowNet* frozen_enc,
                         const TrainSpec& spec, const TrainData& data,
                         const ForwardModel& fm, const CounterRng& rng,
                         const EvalHook* hook) {
  spec.validate(data.U.cols());
  const auto start = std::chrono::steady_clock::now();
  PhaseHistory hist;
  AdamState adam = AdamState::init(net);
  double best_metric = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    CounterRng epoch_rng = rng.stream(static_cast<std::uint64_t>(epoch));
    LossGrad lg;
    try {
      lg = spec.phase == Phase::encoder
               ? loss_and_grad(spec, net, nullptr, data, fm, epoch_rng)
               : loss_and_grad(spec, *frozen_enc, &net, data, fm, epoch_rng);
    } catch (const TrainingError&) {
      throw TrainingError("training diverged", epoch);
    }
    adam_step(adam, net, lg.grads, spec.lr);
    hist.loss.push_back(lg.loss);
    hist.epochs_run = epoch + 1;

    if (hook && spec.eval_every > 0 && (epoch + 1) % spec.eval_every == 0) {
      const double metric = hook->metric(net);
      hist.test_metric.emplace_back(epoch + 1, metric);
      if (metric < best_metric) {
        best_metric = metric;
        best_epoch = epoch + 1;
      } else if (spec.plateau_epochs > 0 &&
                 epoch + 1 - best_epoch >= spec.plateau_epochs) {
        hist.stop_reason = "plateau";
        break;
      }
    }
  }
  hist.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return hist;
}

NetShape net_shape(Approach a, Eigen::Index n, Eigen::Index m,
                   Eigen::Index p) {
  switch (a) {
    case Approach::npop:
    case Approach::mcpop:
      return {n, m, m, n};
    case Approach::nopo:
    case Approach::mcopo:
    case Approach::taen:
      return {m, n, n, m};
    case Approach::mcopo_full:
    case Approach::taen_full:
      return {m, n, n, p};
  }
  throw DimensionError("net_shape: unknown approach");
}

TrainResult train_sequential(const TrainSpec& enc_spec,
                             const TrainSpec& dec_spec, const TrainData& data,
                             const ForwardModel& fm, const CounterRng& rng,
                             const EvalHook* enc_hook,
                             const EvalHook* dec_hook) {
  if (enc_spec.approach != dec_spec.approach) {
    throw DimensionError("train_sequential: phase specs disagree on approach");
  }
  const NetShape shape =
      net_shape(enc_spec.approach, data.U.rows(), data.Y.rows(),
                fm.state_dim());

  TrainResult result;
  CounterRng enc_init = rng.stream(0);
  CounterRng dec_init = rng.stream(1);
  result.enc = ShallowNet::init(shape.enc_in, enc_spec.hidden, shape.enc_out,
                                enc_spec.weight_std, enc_init);
  result.dec = ShallowNet::init(shape.dec_in, dec_spec.hidden, shape.dec_out,
                                dec_spec.weight_std, dec_init);
  result.enc.identity_activation = enc_spec.identity_activation;
  result.dec.identity_activation = dec_spec.identity_activation;

  TrainSpec e = enc_spec;
  e.phase = Phase::encoder;
  TrainSpec d = dec_spec;
  d.phase = Phase::decoder;

  result.enc_history =
      train_phase(result.enc, nullptr, e, data, fm, rng.stream(2), enc_hook);
  result.dec_history = train_phase(result.dec, &result.enc, d, data, fm,
                                   rng.stream(3), dec_hook);
  return result;
}

namespace {

void put_net(std::ostream& os, const ShallowNet& net) {
  write_matrix(os, net.W1);
  write_matrix(os, Mat(net.b1));
  write_matrix(os, net.W2);
  write_matrix(os, Mat(net.b2));
  blob::put_u32(os, net.identity_activation ? 1 : 0);
}

ShallowNet get_net(std::istream& is) {
  ShallowNet net;
  net.W1 = read_matrix(is);
  net.b1 = read_matrix(is).col(0);
  net.W2 = read_matrix(is);
  net.b2 = read_matrix(is).col(0);
  net.identity_activation = blob::get_u32(is) != 0;
  return net;
}

void put_adam(std::ostream& os, const AdamState& s) {
  write_matrix(os, s.mW1);
  write_matrix(os, s.vW1);
  write_matrix(os, Mat(s.mb1));
  write_matrix(os, Mat(s.vb1));
  write_matrix(os, s.mW2);
  write_matrix(os, s.vW2);
  write_matrix(os, Mat(s.mb2));
  write_matrix(os, Mat(s.vb2));
  blob::put_u64(os, static_cast<std::uint64_t>(s.step));
}

AdamState get_adam(std::istream& is) {
  AdamState s;
  s.mW1 = read_matrix(is);
  s.vW1 = read_matrix(is);
  s.mb1 = read_matrix(is).col(0);
  s.vb1 = read_matrix(is).col(0);
  s.mW2 = read_matrix(is);
  s.vW2 = read_matrix(is);
  s.mb2 = read_matrix(is).col(0);
  s.vb2 = read_matrix(is).col(0);
  s.step = static_cast<long>(blob::get_u64(is));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  blob::put_magic(os, "MCAECKP1");
  blob::put_u32(os, 1);  // format version
  put_net(os, ckpt.enc);
  put_net(os, ckpt.dec);
  put_adam(os, ckpt.adam_enc);
  put_adam(os, ckpt.adam_dec);
  blob::put_u64(os, ckpt.rng_seed);
  blob::put_u64(os, ckpt.rng_counter);
  blob::put_u32(os, static_cast<std::uint32_t>(ckpt.epochs_enc));
  blob::put_u32(os, static_cast<std::uint32_t>(ckpt.epochs_dec));
  if (!os) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  blob::check_magic(is, "MCAECKP1", "load_checkpoint");
  const std::uint32_t version = blob::get_u32(is);
  if (version != 1) {
    throw IoError("load_checkpoint: unsupported version " +
                  std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.enc = get_net(is);
  ckpt.dec = get_net(is);
  ckpt.adam_enc = get_adam(is);
  ckpt.adam_dec = get_adam(is);
  ckpt.rng_seed = blob::get_u64(is);
  ckpt.rng_counter = blob::get_u64(is);
  ckpt.epochs_enc = static_cast<std::int32_t>(blob::get_u32(is));
  ckpt.epochs_dec = static_cast<std::int32_t>(blob::get_u32(is));
  return ckpt;
}

}  // namespace mcae
