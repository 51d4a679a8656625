#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mcae/random_field.hpp"
#include "mcae/training.hpp"

using namespace mcae;

namespace {

Mat random_matrix(int rows, int cols, CounterRng& rng) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

struct TinySetup {
  LinearSurrogate fm;
  TrainData data;
};

// n = 3, m = 2, n_t = 2 linear instance for gradient checks.
TinySetup tiny_setup(std::uint64_t seed) {
  CounterRng rng(seed);
  Mat g = random_matrix(2, 3, rng);
  TrainData data;
  data.U = random_matrix(3, 2, rng);
  data.Y = g * data.U + 0.3 * random_matrix(2, 2, rng);
  data.u0 = 0.2 * random_matrix(3, 1, rng).col(0);
  return {LinearSurrogate(g, {0, 1}), data};
}

TrainSpec base_spec(Approach a, Phase phase) {
  TrainSpec spec;
  spec.approach = a;
  spec.phase = phase;
  spec.lambda = 0.7;
  spec.epsilon = approach_randomizes(a) ? 0.15 : 0.0;
  spec.hidden = 4;
  return spec;
}

double param_loss(const TrainSpec& spec, const ShallowNet& enc,
                  const ShallowNet* dec, const TrainData& data,
                  const ForwardModel& fm, const CounterRng& rng) {
  return loss_and_grad(spec, enc, dec, data, fm, rng).loss;
}

}  // namespace

TEST_CASE("TAEN encoder loss at zero parameters") {
  TinySetup s = tiny_setup(1);
  TrainSpec spec = base_spec(Approach::taen, Phase::encoder);
  spec.lambda = 0.0;
  spec.epsilon = 0.0;
  CounterRng init(5);
  ShallowNet enc = ShallowNet::init(2, 4, 3, 0.1, init);
  enc.W1.setZero();
  enc.W2.setZero();
  CounterRng rng(9);
  LossGrad lg = loss_and_grad(spec, enc, nullptr, s.data, s.fm, rng);
  const double expected =
      0.5 * s.data.U.cols() * s.data.u0.squaredNorm();
  CHECK(lg.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences for every approach and phase") {
  const Approach approaches[] = {Approach::npop,       Approach::nopo,
                                 Approach::mcpop,      Approach::mcopo,
                                 Approach::mcopo_full, Approach::taen,
                                 Approach::taen_full};
  TinySetup s = tiny_setup(2);
  const double h = 1e-6;
  CounterRng noise(31);

  for (Approach a : approaches) {
    for (Phase phase : {Phase::encoder, Phase::decoder}) {
      TrainSpec spec = base_spec(a, phase);
      const NetShape shape = net_shape(a, 3, 2, 2);
      CounterRng init(40 + static_cast<int>(a));
      ShallowNet enc =
          ShallowNet::init(shape.enc_in, 4, shape.enc_out, 0.4, init);
      ShallowNet dec =
          ShallowNet::init(shape.dec_in, 4, shape.dec_out, 0.4, init);

      ShallowNet& trained = (phase == Phase::encoder) ? enc : dec;
      LossGrad lg = loss_and_grad(spec, enc, &dec, s.data, s.fm, noise);

      auto fd_check = [&](double& entry, double grad) {
        const double save = entry;
        entry = save + h;
        const double plus =
            param_loss(spec, enc, &dec, s.data, s.fm, noise);
        entry = save - h;
        const double minus =
            param_loss(spec, enc, &dec, s.data, s.fm, noise);
        entry = save;
        const double fd = (plus - minus) / (2.0 * h);
        CAPTURE(approach_name(a));
        CHECK(grad == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      };
      for (int r = 0; r < trained.W1.rows(); ++r) {
        fd_check(trained.W1(r, 0), lg.grads.dW1(r, 0));
      }
      for (int r = 0; r < trained.W2.rows(); ++r) {
        fd_check(trained.W2(r, 0), lg.grads.dW2(r, 0));
      }
      fd_check(trained.b1(0), lg.grads.db1(0));
      fd_check(trained.b2(0), lg.grads.db2(0));
    }
  }
}

TEST_CASE("epsilon rejected for approaches without randomization") {
  TrainSpec spec = base_spec(Approach::npop, Phase::encoder);
  spec.epsilon = 0.1;
  CHECK_THROWS_AS(spec.validate(4), DimensionError);
}

TEST_CASE("adam") {
  CounterRng rng(3);
  ShallowNet net = ShallowNet::init(2, 3, 2, 0.3, rng);
  AdamState state = AdamState::init(net);

  SUBCASE("zero gradient leaves parameters unchanged") {
    ShallowNet before = net;
    adam_step(state, net, NetGrads::zeros_like(net), 1e-3);
    CHECK((net.W1 - before.W1).norm() == 0.0);
    CHECK((net.W2 - before.W2).norm() == 0.0);
  }
  SUBCASE("first step is lr-scaled sign of the gradient") {
    NetGrads g = NetGrads::zeros_like(net);
    g.dW1.setConstant(0.25);
    const double w0 = net.W1(0, 0);
    adam_step(state, net, g, 1e-3);
    // After bias correction the first update is lr * g / (|g| + eps).
    CHECK(net.W1(0, 0) ==
          doctest::Approx(w0 - 1e-3 * 0.25 / (0.25 + 1e-8)).epsilon(1e-9));
  }
  SUBCASE("parameter blocks update independently") {
    NetGrads g = NetGrads::zeros_like(net);
    g.dW2.setConstant(1.0);
    ShallowNet before = net;
    adam_step(state, net, g, 1e-3);
    CHECK((net.W1 - before.W1).norm() == 0.0);
    CHECK((net.b1 - before.b1).norm() == 0.0);
    CHECK((net.W2 - before.W2).norm() > 0.0);
  }
}

TEST_CASE("train_phase with zero epochs returns the initial net untouched") {
  TinySetup s = tiny_setup(4);
  TrainSpec spec = base_spec(Approach::taen, Phase::encoder);
  spec.epochs = 0;
  CounterRng init(11);
  ShallowNet enc = ShallowNet::init(2, 4, 3, 0.2, init);
  ShallowNet before = enc;
  PhaseHistory hist =
      train_phase(enc, nullptr, spec, s.data, s.fm, CounterRng(12));
  CHECK(hist.loss.empty());
  CHECK(hist.epochs_run == 0);
  CHECK((enc.W1 - before.W1).norm() == 0.0);
}

TEST_CASE("noise discipline: non-randomizing approaches never randomize") {
  TinySetup s = tiny_setup(5);
  for (Approach a : {Approach::npop, Approach::mcpop, Approach::nopo}) {
    TrainSpec enc_spec = base_spec(a, Phase::encoder);
    TrainSpec dec_spec = base_spec(a, Phase::decoder);
    enc_spec.epochs = 3;
    dec_spec.epochs = 3;
    enc_spec.hidden = dec_spec.hidden = 4;
    reset_randomize_call_count();
    (void)train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(7));
    CHECK(randomize_call_count() == 0);
  }
  TrainSpec enc_spec = base_spec(Approach::taen, Phase::encoder);
  TrainSpec dec_spec = base_spec(Approach::taen, Phase::decoder);
  enc_spec.epochs = 2;
  dec_spec.epochs = 2;
  reset_randomize_call_count();
  (void)train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(7));
  // Two phases x two epochs x two samples.
  CHECK(randomize_call_count() == 8);
}

TEST_CASE("phase 2 never mutates the encoder") {
  TinySetup s = tiny_setup(6);
  TrainSpec enc_spec = base_spec(Approach::taen, Phase::encoder);
  TrainSpec dec_spec = base_spec(Approach::taen, Phase::decoder);
  enc_spec.epochs = 4;
  dec_spec.epochs = 0;
  TrainResult r1 =
      train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(8));
  dec_spec.epochs = 6;
  TrainResult r2 =
      train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(8));
  CHECK((r1.enc.W1 - r2.enc.W1).norm() == 0.0);
  CHECK((r1.enc.b1 - r2.enc.b1).norm() == 0.0);
  CHECK((r1.enc.W2 - r2.enc.W2).norm() == 0.0);
  CHECK((r1.enc.b2 - r2.enc.b2).norm() == 0.0);
}

TEST_CASE("training trajectories are deterministic under a fixed seed") {
  TinySetup s = tiny_setup(7);
  TrainSpec enc_spec = base_spec(Approach::mcopo, Phase::encoder);
  TrainSpec dec_spec = base_spec(Approach::mcopo, Phase::decoder);
  enc_spec.epochs = 5;
  dec_spec.epochs = 5;
  TrainResult a =
      train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(9));
  TrainResult b =
      train_sequential(enc_spec, dec_spec, s.data, s.fm, CounterRng(9));
  CHECK(a.enc_history.loss == b.enc_history.loss);
  CHECK(a.dec_history.loss == b.dec_history.loss);
  CHECK((a.dec.W1 - b.dec.W1).norm() == 0.0);
}

TEST_CASE("replicated single sample yields distinct randomized copies") {
  CounterRng rng(10);
  Mat g = random_matrix(2, 3, rng);
  LinearSurrogate fm(g, {0, 1});
  Vec u = random_matrix(3, 1, rng).col(0);
  Vec y = g * u + Vec::Constant(2, 0.5);
  TrainData data;
  data.U = u.replicate(1, 8);
  data.Y = y.replicate(1, 8);
  data.u0 = Vec::Zero(3);

  TrainSpec spec = base_spec(Approach::taen, Phase::encoder);
  spec.epsilon = 0.2;
  // The loss at zero parameters sees the randomized batch: with all-equal
  // inputs the model-term columns must differ across the batch.
  CounterRng init(11);
  ShallowNet enc = ShallowNet::init(2, 4, 3, 0.3, init);
  reset_randomize_call_count();
  (void)loss_and_grad(spec, enc, nullptr, data, fm, CounterRng(12));
  CHECK(randomize_call_count() == 8);
}

TEST_CASE("ADAM decreases the convex TAEN encoder loss in windowed mean") {
  CounterRng rng(13);
  Mat g = random_matrix(2, 3, rng);
  LinearSurrogate fm(g, {0, 1});
  TrainData data;
  data.U = random_matrix(3, 4, rng);
  data.Y = g * data.U;
  data.u0 = Vec::Zero(3);

  TrainSpec spec = base_spec(Approach::taen, Phase::encoder);
  spec.epsilon = 0.0;
  spec.identity_activation = true;
  spec.hidden = 4;
  spec.epochs = 900;
  CounterRng init(14);
  ShallowNet enc = ShallowNet::init(2, 4, 3, 0.2, init);
  enc.identity_activation = true;
  PhaseHistory hist =
      train_phase(enc, nullptr, spec, data, fm, CounterRng(15));

  auto window_mean = [&](int start) {
    double acc = 0.0;
    for (int i = start; i < start + 100; ++i) acc += hist.loss[i];
    return acc / 100.0;
  };
  for (int start = 500; start + 200 <= spec.epochs; start += 100) {
    const double a = window_mean(start);
    const double b = window_mean(start + 100);
    CHECK(b <= a + 1e-9 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("identity-activation TAEN training reproduces the closed form") {
  // Linear problem, single observation sample expanded by randomization.
  CounterRng rng(16);
  Mat g = random_matrix(2, 3, rng);
  LinearSurrogate fm(g, {0, 1});
  Vec u_true = random_matrix(3, 1, rng).col(0);
  Vec y = g * u_true + Vec::Constant(2, 0.4);
  const int nt = 24;
  TrainData data;
  data.U = u_true.replicate(1, nt);
  data.Y = y.replicate(1, nt);
  data.u0 = Vec::Constant(3, 0.1);

  TrainSpec enc_spec = base_spec(Approach::taen, Phase::encoder);
  enc_spec.lambda = 1.3;
  enc_spec.epsilon = 0.1;
  enc_spec.identity_activation = true;
  enc_spec.hidden = 6;
  enc_spec.epochs = 6000;
  enc_spec.lr = 2e-3;
  TrainSpec dec_spec = enc_spec;
  dec_spec.phase = Phase::decoder;
  dec_spec.epochs = 0;
  TrainResult r =
      train_sequential(enc_spec, dec_spec, data, fm, CounterRng(17));

  // Fine-tune at a smaller step to squeeze out the ADAM noise floor.
  TrainSpec fine = enc_spec;
  fine.lr = 5e-5;
  fine.epochs = 4000;
  (void)train_phase(r.enc, nullptr, fine, data, fm, CounterRng(18));

  // Closed-form reference: full-row-rank randomized Ybar gives the exact
  // Tikhonov map.
  LinearProblem p;
  p.GB = g;
  p.U = data.U;
  CounterRng draws(19);
  p.Y = Mat(2, nt);
  for (int i = 0; i < nt; ++i) {
    CounterRng s = draws.stream(i);
    p.Y.col(i) = randomize(y, enc_spec.epsilon, s);
  }
  p.u0 = data.u0;
  p.lambda = enc_spec.lambda;
  EncDec closed = fit_taen(p);

  CounterRng test(20);
  for (int i = 0; i < 10; ++i) {
    Vec probe = y + 0.2 * random_matrix(2, 1, test).col(0);
    Vec got = net_forward(r.enc, Mat(probe)).col(0);
    Vec want = closed.enc(probe);
    CHECK((got - want).norm() <= 2e-3 * (1.0 + want.norm()));
  }
}

TEST_CASE("checkpoint round-trip") {
  CounterRng rng(21);
  ShallowNet enc = ShallowNet::init(2, 3, 4, 0.2, rng);
  ShallowNet dec = ShallowNet::init(4, 3, 2, 0.2, rng);
  Checkpoint ckpt;
  ckpt.enc = enc;
  ckpt.dec = dec;
  ckpt.adam_enc = AdamState::init(enc);
  ckpt.adam_dec = AdamState::init(dec);
  ckpt.adam_enc.step = 17;
  ckpt.rng_seed = 100;
  ckpt.rng_counter = 12345;
  ckpt.epochs_enc = 7;
  ckpt.epochs_dec = 3;

  const std::string path = "ckpt_test.bin";
  save_checkpoint(path, ckpt);
  Checkpoint loaded = load_checkpoint(path);
  std::filesystem::remove(path);

  CHECK((loaded.enc.W1 - enc.W1).norm() == 0.0);
  CHECK((loaded.dec.W2 - dec.W2).norm() == 0.0);
  CHECK(loaded.adam_enc.step == 17);
  CHECK(loaded.rng_counter == 12345);
  CHECK(loaded.epochs_enc == 7);
}
