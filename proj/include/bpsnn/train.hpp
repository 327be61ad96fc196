#pragma once

// Cross-entropy loss, Adam, and the epoch loop.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bpsnn/codec.hpp"
#include "bpsnn/config.hpp"
#include "bpsnn/data.hpp"
#include "bpsnn/network.hpp"
#include "bpsnn/snr.hpp"

namespace bpsnn::train {

// Mean over the batch of -log softmax(logits)[label]. logits (B, K).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;

  static AdamState from(const OptimizerConfig& cfg);
};

// One bias-corrected Adam update. A parameter without a gradient is treated
// as having a zero gradient. Moments are allocated on the first call.
void adam_step(std::span<Tensor> params, AdamState& state);
void adam_step(net::SpikingNet& net, AdamState& state);

// Lowest index wins ties.
std::size_t argmax_row(const Tensor& logits, std::size_t row);

// Fraction of rows whose argmax equals the label.
double accuracy(const Tensor& logits, std::span<const int> labels);

// Encoder settings resolved for a dataset.
codec::EncoderConfig encoder_config(const RunConfig& cfg);
net::NetConfig network_config(const RunConfig& cfg, const data::Dataset& ds);

// Validation accuracy with rate noise drawn from `enc.seed`.
double evaluate(net::SpikingNet& net, const data::Dataset& split, const codec::EncoderConfig& enc,
                std::size_t batch_size = 64);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_acc = 0.0;
  double epoch_ms = 0.0;
  std::optional<snr::GradSnrReport> snr;
};

struct RunResult {
  std::vector<EpochRecord> history;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t parameter_count = 0;
  std::shared_ptr<net::SpikingNet> net;
};

// Seed of the rate encoder for batch `batch` of epoch `epoch`.
std::uint64_t batch_seed(std::uint64_t seed, std::size_t epoch, std::size_t batch);

// Trains per cfg; the result keeps the trained network.
using EpochCallback = std::function<void(const EpochRecord&)>;
RunResult train_run(const RunConfig& cfg, const data::Dataset& ds, const EpochCallback& on_epoch = {});

data::Dataset load_dataset(const DatasetSource& source);

// history.csv, snr.csv (when SNR was captured), run.json and weights.json/bin.
void write_outputs(const RunConfig& cfg, const RunResult& result);
std::string history_csv(const RunResult& result, bool timing);
std::string snr_csv(const RunConfig& cfg, const RunResult& result, bool header = true);

}  // namespace bpsnn::train
