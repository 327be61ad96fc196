#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "bpsnn/train.hpp"
#include "grad_check.hpp"
#include "oracles.hpp"

using namespace bpsnn;
using namespace bpsnn::train;

namespace {

RunConfig toy_config() {
  RunConfig cfg;
  cfg.dataset.synthetic = true;
  cfg.dataset.synthetic_n = 64;
  cfg.dataset.synthetic_classes = 2;
  cfg.dataset.synthetic_height = 8;
  cfg.dataset.synthetic_width = 8;
  cfg.network.channels = 4;
  cfg.network.hidden = 16;
  cfg.timesteps = 4;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.timing = false;
  cfg.save_weights = false;
  cfg.seed = 5;
  return cfg;
}

// -log softmax(z)[y] written out directly.
double ce_oracle(const std::vector<double>& z, std::size_t b, std::size_t k, const std::vector<int>& y) {
  double total = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(z[r * k + j]);
    total += std::log(s) - z[r * k + static_cast<std::size_t>(y[r])];
  }
  return total / static_cast<double>(b);
}

}  // namespace

TEST(CrossEntropy, Examples) {
  const std::vector<int> zero{0};
  EXPECT_NEAR(softmax_cross_entropy(Tensor({1, 10}, std::vector<double>(10, 0.0)), zero).item(), std::log(10.0),
              1e-12);
  EXPECT_NEAR(softmax_cross_entropy(Tensor({1, 2}, {100.0, 0.0}), zero).item(), 0.0, 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(Tensor({1, 2}, {1000.0, 0.0}), std::vector<int>{1}).item(), 1000.0, 1e-9);
}

TEST(CrossEntropy, MatchesOracle) {
  const auto z = oracle::random_vector(12, 3, -4, 4);
  const std::vector<int> y{2, 0, 1, 2};
  EXPECT_NEAR(softmax_cross_entropy(Tensor({4, 3}, z), y).item(), ce_oracle(z, 4, 3, y), 1e-12);
}

TEST(CrossEntropy, Errors) {
  const Tensor z({2, 3}, std::vector<double>(6, 0.0));
  EXPECT_THROW(softmax_cross_entropy(z, std::vector<int>{0, 3}), std::invalid_argument);
  EXPECT_THROW(softmax_cross_entropy(z, std::vector<int>{-1, 0}), std::invalid_argument);
  EXPECT_THROW(softmax_cross_entropy(z, std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(softmax_cross_entropy(Tensor({6}, std::vector<double>(6, 0.0)), std::vector<int>{0}),
               std::invalid_argument);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  std::vector<Tensor> leaves{Tensor({3, 4}, oracle::random_vector(12, 9, -2, 2), true)};
  const std::vector<int> y{3, 1, 0};
  auto loss = [&](const std::vector<Tensor>& in) { return softmax_cross_entropy(in[0], y); };
  EXPECT_LT(gradcheck::worst_error(leaves, loss), 1e-6);
}

TEST(Adam, ZeroGradientLeavesWeights) {
  std::vector<Tensor> p{Tensor({3}, {1.0, -2.0, 0.5}, true)};
  AdamState s;
  adam_step(std::span<Tensor>(p), s);
  EXPECT_EQ(std::vector<double>(p[0].data().begin(), p[0].data().end()), (std::vector<double>{1.0, -2.0, 0.5}));
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor w({2}, {0.0, 0.0}, true);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(w, Tensor({2}, {3.0, -0.5}))));
  }
  std::vector<Tensor> p{w};
  AdamState s;
  adam_step(std::span<Tensor>(p), s);
  // Bias-corrected m / sqrt(v) is sign(g) on the first step.
  EXPECT_NEAR(w[0], -1e-3, 1e-10);
  EXPECT_NEAR(w[1], 1e-3, 1e-10);
}

TEST(Adam, MatchesScalarRecurrence) {
  Tensor w({1}, {0.3}, true);
  AdamState s;
  s.lr = 0.01;
  double m = 0, v = 0, x = 0.3;
  for (int t = 1; t <= 5; ++t) {
    w.zero_grad();
    {
      Tape tape;
      TapeScope scope(tape);
      tape.backward(sum(mul(w, w)));
    }
    std::vector<Tensor> p{w};
    adam_step(std::span<Tensor>(p), s);
    const double g = 2 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(w[0], x, 1e-14);
  }
}

TEST(Adam, ParameterCountMismatch) {
  std::vector<Tensor> a{Tensor({2}, {0, 0})}, b{Tensor({2}, {0, 0}), Tensor({1}, {0})}, c{Tensor({3}, {0, 0, 0})};
  AdamState s;
  adam_step(std::span<Tensor>(a), s);
  EXPECT_THROW(adam_step(std::span<Tensor>(b), s), std::invalid_argument);
  EXPECT_THROW(adam_step(std::span<Tensor>(c), s), std::invalid_argument);
}

TEST(Accuracy, Examples) {
  const Tensor z({3, 2}, {2, 1, 0, 5, 3, 3});
  EXPECT_NEAR(accuracy(z, std::vector<int>{0, 1, 1}), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(argmax_row(z, 2), 0u);
  EXPECT_THROW(accuracy(z, std::vector<int>{0}), std::invalid_argument);
}

TEST(Evaluate, ConstantPredictor) {
  data::Dataset ds = data::synthetic(3, 2, 1, 4, 4);
  ds.labels = {0, 0, 1};
  RunConfig cfg = toy_config();
  net::SpikingNet net(network_config(cfg, ds), 1);
  // Readout bias alone decides the class.
  for (auto& p : net.parameters()) {
    auto d = p.value.mutable_data();
    std::fill(d.begin(), d.end(), 0.0);
  }
  auto bias = net.parameters().back().value.mutable_data();
  bias[0] = 1.0;
  codec::EncoderConfig enc = encoder_config(cfg);
  EXPECT_NEAR(evaluate(net, ds, enc, 2), 2.0 / 3.0, 1e-15);
  bias[0] = -1.0;
  EXPECT_NEAR(evaluate(net, ds, enc), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(evaluate(net, data::Dataset{}, enc), std::invalid_argument);
}

TEST(TrainRun, RejectsZeroEpochs) {
  RunConfig cfg = toy_config();
  cfg.epochs = 0;
  EXPECT_THROW(train_run(cfg, load_dataset(cfg.dataset)), std::invalid_argument);
}

TEST(TrainRun, DeterministicAndWorkerInvariant) {
  RunConfig cfg = toy_config();
  cfg.snr = true;
  const auto ds = load_dataset(cfg.dataset);
  const auto a = train_run(cfg, ds);
  const auto b = train_run(cfg, ds);
  cfg.workers = 3;
  const auto c = train_run(cfg, ds);
  EXPECT_EQ(history_csv(a, false), history_csv(b, false));
  EXPECT_EQ(history_csv(a, false), history_csv(c, false));
  EXPECT_EQ(snr_csv(cfg, a), snr_csv(cfg, c));
  EXPECT_EQ(a.train_size, 51u);
  EXPECT_EQ(a.val_size, 13u);
  ASSERT_EQ(a.history.size(), 3u);
  for (const auto& r : a.history) {
    ASSERT_TRUE(r.snr.has_value());
    EXPECT_EQ(r.snr->sample_count, 8u);
    EXPECT_EQ(r.epoch_ms, 0.0);
  }
}

TEST(TrainRun, LossDecreases) {
  RunConfig cfg = toy_config();
  cfg.epochs = 12;
  cfg.optimizer.lr = 3e-3;
  const auto result = train_run(cfg, load_dataset(cfg.dataset));
  EXPECT_LT(result.history.back().train_loss, result.history.front().train_loss);
  EXPECT_GE(result.history.back().val_acc, 0.75);
}

TEST(TrainRun, CallbackSeesEveryEpoch) {
  RunConfig cfg = toy_config();
  std::vector<std::size_t> seen;
  train_run(cfg, load_dataset(cfg.dataset), [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(RunConfigJson, UnknownKeysRejected) {
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"epoch": 3})")), std::invalid_argument);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"network": {"chanels": 3}})")), std::invalid_argument);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"dataset": {"synthetic": {}}, "epochs": "3"})")),
               std::invalid_argument);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"dataset": {"synthetic": {}}, "epochs": 0})")),
               std::invalid_argument);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"dataset": {"synthetic": {}}, "encoder": {"color": "cmyk"}})")),
               std::invalid_argument);
}

TEST(RunConfigJson, RoundTrip) {
  const auto doc = nlohmann::json::parse(R"({
    "dataset": {"synthetic": {"n": 40, "classes": 4, "seed": 3, "height": 8, "width": 8}},
    "encoder": {"mode": "bitplane", "color": "hsv", "timesteps": 6, "workers": 2},
    "network": {"channels": 4, "join": "iand", "surrogate": {"family": "sigmoid", "alpha": 4.0}},
    "epochs": 2, "seed": 9, "snr": true})");
  const RunConfig cfg = parse_run_config(doc);
  EXPECT_EQ(cfg.mode, codec::EncodeMode::bitplane);
  EXPECT_EQ(cfg.color, "hsv");
  EXPECT_EQ(cfg.network.join, net::SewJoin::iand);
  EXPECT_EQ(cfg.network.surrogate.family, neuron::SurrogateFamily::sigmoid);
  EXPECT_EQ(cfg.dataset.synthetic_n, 40u);
  EXPECT_TRUE(cfg.snr);
  EXPECT_EQ(to_json(parse_run_config(to_json(cfg))), to_json(cfg));
}

TEST(BatchSeed, DistinctAcrossBatchesAndEpochs) {
  EXPECT_NE(batch_seed(0, 1, 0), batch_seed(0, 1, 1));
  EXPECT_NE(batch_seed(0, 1, 0), batch_seed(0, 2, 0));
  EXPECT_EQ(batch_seed(4, 3, 2), batch_seed(4, 3, 2));
}
