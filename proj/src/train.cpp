#include "bpsnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bpsnn/kernels.hpp"
#include "bpsnn/rng.hpp"

namespace bpsnn::train {

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: logits must be (B, K)");
  const std::size_t b = logits.dim(0), k = logits.dim(1);
  if (labels.size() != b) throw std::invalid_argument("softmax_cross_entropy: label count differs from batch");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) {
      throw std::invalid_argument("label " + std::to_string(l) + " outside [0, " + std::to_string(k) + ")");
    }
  }

  const auto z = logits.data();
  std::vector<double> probs(b * k);
  double loss = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double* row = z.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < k; ++j) probs[r * k + j] = std::exp(row[j] - mx) / total;
    loss += std::log(total) - (row[labels[r]] - mx);
  }
  loss /= static_cast<double>(b);

  Tape* tape = detail::recording_tape({&logits});
  Tensor result = detail::make_result({}, {loss}, tape != nullptr);
  if (tape) {
    auto rn = result.node();
    std::vector<int> targets(labels.begin(), labels.end());
    tape->record({logits.node()}, {rn}, [logits, rn, probs = std::move(probs), targets = std::move(targets), b, k] {
      const double g = rn->grad[0] / static_cast<double>(b);
      auto& dz = logits.node()->ensure_grad();
      for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t j = 0; j < k; ++j) {
          const double onehot = static_cast<std::size_t>(targets[r]) == j ? 1.0 : 0.0;
          dz[r * k + j] += g * (probs[r * k + j] - onehot);
        }
      }
    });
  }
  return result;
}

AdamState AdamState::from(const OptimizerConfig& cfg) {
  AdamState s;
  s.lr = cfg.lr;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.eps = cfg.eps;
  return s;
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  if (state.m.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state tracks a different parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].numel() || state.v[i].size() != params[i].numel()) {
      throw std::invalid_argument("adam_step: moment shape differs from parameter " + std::to_string(i));
    }
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_data();
    const auto g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      w[j] -= state.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.eps);
    }
  }
}

void adam_step(net::SpikingNet& net, AdamState& state) {
  std::vector<Tensor> params;
  for (const auto& p : net.parameters()) params.push_back(p.value);
  adam_step(std::span<Tensor>(params), state);
}

std::size_t argmax_row(const Tensor& logits, std::size_t row) {
  const std::size_t k = logits.dim(1);
  const auto z = logits.data().subspan(row * k, k);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw std::invalid_argument("accuracy: logits and labels disagree");
  }
  std::size_t correct = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    correct += argmax_row(logits, r) == static_cast<std::size_t>(labels[r]) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

codec::EncoderConfig encoder_config(const RunConfig& cfg) {
  codec::EncoderConfig enc;
  enc.timesteps = cfg.timesteps;
  enc.model = color::spec_for(cfg.color);
  enc.seed = cfg.seed;
  enc.mode = cfg.mode;
  enc.workers = cfg.workers;
  return enc;
}

net::NetConfig network_config(const RunConfig& cfg, const data::Dataset& ds) {
  net::NetConfig n = cfg.network;
  const bool gray = ds.images.dim(1) == 1 && color::parse_model(cfg.color) == color::ColorModel::rgb;
  n.in_channels = gray ? 1 : 3;
  n.height = ds.images.dim(2);
  n.width = ds.images.dim(3);
  n.num_classes = static_cast<std::size_t>(ds.num_classes);
  return n;
}

std::uint64_t batch_seed(std::uint64_t seed, std::size_t epoch, std::size_t batch) {
  return rng::hash(seed, epoch, batch);
}

double evaluate(net::SpikingNet& net, const data::Dataset& split, const codec::EncoderConfig& enc,
                std::size_t batch_size) {
  if (split.size() == 0) throw std::invalid_argument("evaluate: empty split");
  if (batch_size == 0) throw std::invalid_argument("evaluate: batch_size must be positive");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0, b = 0; start < split.size(); start += batch_size, ++b) {
    const std::size_t end = std::min(split.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    codec::EncoderConfig e = enc;
    e.seed = batch_seed(enc.seed, 0, b);
    net.reset();
    const Tensor logits = net.forward(codec::encode(data::batch_images(split, idx), e));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      correct += argmax_row(logits, r) == static_cast<std::size_t>(split.labels[start + r]) ? 1 : 0;
    }
  }
  net.reset();
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

RunResult train_run(const RunConfig& cfg, const data::Dataset& ds, const EpochCallback& on_epoch) {
  cfg.validate();
  ds.validate();
  auto [train_idx, val_idx] = data::split_indices(ds.size(), cfg.train_fraction, cfg.split_seed);
  const data::Dataset train = data::subset(ds, train_idx);
  const data::Dataset val = data::subset(ds, val_idx);

  const codec::EncoderConfig enc = encoder_config(cfg);
  codec::EncoderConfig eval_enc = enc;
  eval_enc.seed = cfg.eval_seed;

  auto net_ptr = std::make_shared<net::SpikingNet>(network_config(cfg, ds), rng::hash(cfg.seed, 1, 0));
  net::SpikingNet& net = *net_ptr;
  AdamState adam = AdamState::from(cfg.optimizer);
  rng::Engine shuffler(rng::hash(cfg.seed, 2, 0));

  RunResult result;
  result.train_size = train.size();
  result.val_size = val.size();
  result.parameter_count = net.parameter_count();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng::shuffle(std::span<std::size_t>(order), shuffler);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::span<const std::size_t> idx(order.data() + start,
                                             std::min(cfg.batch_size, order.size() - start));
      labels.clear();
      for (std::size_t i : idx) labels.push_back(train.labels[i]);
      codec::EncoderConfig e = enc;
      e.seed = batch_seed(cfg.seed, epoch, b);
      const codec::SpikeTrain spikes = codec::encode(data::batch_images(train, idx), e);

      if (b == 0 && cfg.snr && idx.size() >= 2) {
        rec.snr = snr::grad_snr(snr::collect_per_sample_grads(net, spikes, labels));
        rec.snr->epoch = epoch;
      }

      net.reset();
      net.zero_grad();
      Tape tape;
      double loss_value = 0.0;
      {
        TapeScope scope(tape);
        const Tensor loss = softmax_cross_entropy(net.forward(spikes), labels);
        loss_value = loss.item();
        tape.backward(loss);
      }
      adam_step(net, adam);
      net.reset();
      loss_sum += loss_value * static_cast<double>(idx.size());
    }
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    const auto t1 = std::chrono::steady_clock::now();
    rec.epoch_ms = cfg.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    rec.val_acc = evaluate(net, val, eval_enc);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  net.zero_grad();
  result.net = std::move(net_ptr);
  return result;
}

data::Dataset load_dataset(const DatasetSource& source) {
  data::Dataset ds;
  if (source.synthetic) {
    ds = data::synthetic(source.synthetic_n, source.synthetic_classes, source.synthetic_seed, source.synthetic_height,
                         source.synthetic_width);
  } else {
    ds = data::load_idx(source.images, source.labels, source.num_classes);
  }
  if (source.limit > 0 && source.limit < ds.size()) {
    std::vector<std::size_t> idx(source.limit);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    ds = data::subset(ds, idx);
  }
  return ds;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string history_csv(const RunResult& result, bool timing) {
  std::string out = "epoch,train_loss,val_acc,epoch_ms,snr\n";
  for (const auto& r : result.history) {
    out += std::to_string(r.epoch) + ',' + num(r.train_loss) + ',' + num(r.val_acc) + ',' +
           (timing ? num(r.epoch_ms) : std::string("0")) + ',' + (r.snr ? num(r.snr->snr) : std::string()) + '\n';
  }
  return out;
}

std::string snr_csv(const RunConfig& cfg, const RunResult& result, bool header) {
  std::string out = header ? "epoch,sig,noi,snr,mode,colormodel\n" : "";
  for (const auto& r : result.history) {
    if (!r.snr) continue;
    out += std::to_string(r.epoch) + ',' + num(r.snr->sig) + ',' + num(r.snr->noi) + ',' + num(r.snr->snr) + ',' +
           std::string(codec::mode_name(cfg.mode)) + ',' + cfg.color + '\n';
  }
  return out;
}

void write_outputs(const RunConfig& cfg, const RunResult& result) {
  const net::SpikingNet* net = result.net.get();
  std::filesystem::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "history.csv", history_csv(result, cfg.timing));
  if (std::any_of(result.history.begin(), result.history.end(), [](const EpochRecord& r) { return r.snr.has_value(); })) {
    write_text(cfg.output_dir / "snr.csv", snr_csv(cfg, result));
  }
  nlohmann::json run = {
      {"config", to_json(cfg)},
      {"train_size", result.train_size},
      {"val_size", result.val_size},
      {"parameter_count", result.parameter_count},
      {"init", {{"scheme", "uniform"}, {"bound", "init_gain * sqrt(6 / fan_in)"}, {"bias", 0.0}}},
  };
  if (net) {
    const auto& n = net->config();
    run["network_input"] = {{"in_channels", n.in_channels}, {"height", n.height}, {"width", n.width},
                            {"num_classes", n.num_classes}};
  }
  write_text(cfg.output_dir / "run.json", run.dump(2) + "\n");
  if (net && cfg.save_weights) net::save_weights(*net, cfg.output_dir / "weights.json");
}

}  // namespace bpsnn::train
