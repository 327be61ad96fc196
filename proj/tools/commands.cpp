#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "bpsnn/codec.hpp"
#include "bpsnn/colorspace.hpp"
#include "bpsnn/config.hpp"
#include "bpsnn/data.hpp"
#include "bpsnn/network.hpp"
#include "bpsnn/rng.hpp"
#include "bpsnn/spike_file.hpp"
#include "bpsnn/train.hpp"

namespace bpsnn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path images_path(const std::string& input) {
  fs::path p(input);
  if (fs::is_directory(p)) p /= "images.idx";
  if (!fs::exists(p)) throw std::runtime_error("input not found: " + p.string());
  return p;
}

IntTensor first_images(const IntTensor& images, std::size_t limit) {
  if (limit == 0 || limit >= images.dim(0)) return images;
  const std::size_t per = images.numel() / images.dim(0);
  std::vector<IntTensor::value_type> out(images.data().begin(), images.data().begin() + limit * per);
  Shape shape = images.shape();
  shape[0] = limit;
  return IntTensor(shape, std::move(out));
}

std::string fmt(double v, const char* spec = "%.6f") {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RunConfig apply(RunConfig cfg, const TrainOverrides& o) {
  if (o.mode) cfg.mode = codec::parse_mode(*o.mode);
  if (o.color) cfg.color = *o.color;
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.workers) cfg.workers = *o.workers;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.timing) cfg.timing = *o.timing;
  if (o.snr) cfg.snr = true;
  cfg.validate();
  return cfg;
}

double mean_snr(const train::RunResult& r) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& e : r.history) {
    if (!e.snr) continue;
    total += e.snr->snr;
    ++n;
  }
  return n ? total / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

int cmd_encode(const EncodeArgs& args) {
  const auto path = images_path(args.input);
  const IntTensor images = first_images(data::load_idx_images(path), args.limit);

  codec::EncoderConfig cfg;
  cfg.mode = codec::parse_mode(args.mode);
  cfg.model = color::spec_for(args.color);
  cfg.timesteps = args.timesteps;
  cfg.seed = args.seed;
  cfg.workers = args.workers;
  if (cfg.timesteps == 0) throw std::invalid_argument("--timesteps must be at least 1");
  if (cfg.workers == 0) throw std::invalid_argument("--workers must be at least 1");

  const codec::SpikeTrain train = codec::encode(images, cfg);
  codec::write_spike_file(args.out, train);

  json summary = {
      {"out", args.out},
      {"mode", codec::mode_name(cfg.mode)},
      {"color", color::model_name(cfg.model.model)},
      {"n_bit", cfg.model.n_bit},
      {"timesteps", cfg.timesteps},
      {"t_prime", train.steps()},
      {"shape", train.shape},
      {"spike_count", train.spike_count()},
      {"phi", net::firing_rate(train)},
      {"seed", cfg.seed},
  };
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_convert_color(const ConvertArgs& args) {
  const auto spec = color::spec_for(args.color);
  IntTensor images = data::load_idx_images(images_path(args.input));
  if (images.dim(1) == 1) images = data::to_rgb(data::Dataset{images, std::vector<int>(images.dim(0), 0), 1}).images;
  const IntTensor converted = color::convert_color(images, spec);

  // IDX with signed 16-bit big-endian values (type code 0x0B), dims (N, 3, H, W).
  std::string bytes;
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put_u32(0x00000B04);
  for (std::size_t d : converted.shape()) put_u32(static_cast<std::uint32_t>(d));
  for (auto v : converted.data()) {
    bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
    bytes.push_back(static_cast<char>(v & 0xFF));
  }
  write_text(args.out, bytes);

  json summary = {
      {"out", args.out},
      {"color", color::model_name(spec.model)},
      {"channel_max", spec.channel_max},
      {"x_max", spec.x_max},
      {"n_bit", spec.n_bit},
      {"shape", converted.shape()},
      {"max_value", converted.max()},
  };
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_train(const TrainArgs& args) {
  const RunConfig cfg = apply(load_run_config(args.config), args.overrides);
  const data::Dataset ds = train::load_dataset(cfg.dataset);
  const bool quiet = args.overrides.quiet;
  if (!quiet) {
    std::cout << "seed=" << cfg.seed << " split_seed=" << cfg.split_seed << " eval_seed=" << cfg.eval_seed
              << " mode=" << codec::mode_name(cfg.mode) << " color=" << cfg.color << '\n';
  }
  const auto result = train::train_run(cfg, ds, [&](const train::EpochRecord& r) {
    if (quiet) return;
    std::cout << "epoch=" << r.epoch << " train_loss=" << fmt(r.train_loss) << " val_acc=" << fmt(r.val_acc)
              << " epoch_ms=" << fmt(r.epoch_ms, "%.1f");
    if (r.snr) std::cout << " snr=" << fmt(r.snr->snr, "%.6g");
    std::cout << std::endl;
  });
  train::write_outputs(cfg, result);
  json summary = {
      {"output_dir", cfg.output_dir.string()},
      {"epochs", result.history.size()},
      {"train_size", result.train_size},
      {"val_size", result.val_size},
      {"final_val_acc", result.history.back().val_acc},
  };
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const RunConfig cfg = load_run_config(args.config);
  if (!fs::exists(args.weights)) throw std::runtime_error("weights manifest not found: " + args.weights);
  const data::Dataset ds = train::load_dataset(cfg.dataset);
  auto [train_split, val_split] = data::split(ds, cfg.train_fraction, cfg.split_seed);
  const data::Dataset* split = nullptr;
  if (args.split == "val") {
    split = &val_split;
  } else if (args.split == "train") {
    split = &train_split;
  } else {
    throw std::invalid_argument("--split must be train or val");
  }

  net::SpikingNet net(train::network_config(cfg, ds), 0);
  net::load_weights(net, args.weights);
  codec::EncoderConfig enc = train::encoder_config(cfg);
  enc.seed = cfg.eval_seed;
  const double acc = train::evaluate(net, *split, enc);
  json summary = {
      {"split", args.split},
      {"samples", split->size()},
      {"accuracy", acc},
      {"accuracy_pct", fmt(100.0 * acc, "%.2f") + "%"},
  };
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_snr_report(const TrainArgs& args) {
  const RunConfig base = apply(load_run_config(args.config), args.overrides);
  const data::Dataset ds = train::load_dataset(base.dataset);
  const fs::path out_dir = base.output_dir;

  std::string merged = "epoch,sig,noi,snr,mode,colormodel\n";
  std::string means = "mode,colormodel,mean_snr,final_val_acc\n";
  for (auto mode : {codec::EncodeMode::rate, codec::EncodeMode::bitplane, codec::EncodeMode::combined}) {
    RunConfig cfg = base;
    cfg.mode = mode;
    cfg.snr = true;
    cfg.output_dir = out_dir / std::string(codec::mode_name(mode));
    const auto result = train::train_run(cfg, ds);
    train::write_outputs(cfg, result);
    merged += train::snr_csv(cfg, result, false);
    const double m = mean_snr(result);
    means += std::string(codec::mode_name(mode)) + ',' + cfg.color + ',' + fmt(m, "%.10g") + ',' +
             fmt(result.history.back().val_acc, "%.10g") + '\n';
    std::cout << "mode=" << codec::mode_name(mode) << " colormodel=" << cfg.color << " mean_snr=" << fmt(m, "%.6g")
              << " final_val_acc=" << fmt(result.history.back().val_acc, "%.4f") << std::endl;
  }
  write_text(out_dir / "snr.csv", merged);
  write_text(out_dir / "snr_means.csv", means);
  return 0;
}

int cmd_bench(const BenchArgs& args) {
  if (args.repeats < 1) throw std::invalid_argument("--repeats must be at least 1");
  if (args.batches < 1 || args.batch_size < 1) throw std::invalid_argument("--batches and --batch-size must be at least 1");
  if (args.modes.empty() || args.colors.empty()) throw std::invalid_argument("need at least one mode and one color");
  const IntTensor all = data::load_idx_images(images_path(args.dataset));
  const std::size_t need = args.batches * args.batch_size;
  if (all.dim(0) < need) {
    throw std::invalid_argument("dataset has " + std::to_string(all.dim(0)) + " images, bench needs " +
                                std::to_string(need));
  }
  const IntTensor images = first_images(all, need);
  const std::size_t per = images.numel() / images.dim(0);

  struct Cell {
    std::string mode, color;
    std::size_t t_prime = 0;
    double mean_ms = 0.0;
  };
  std::vector<Cell> cells;
  for (const auto& color_name : args.colors) {
    const auto spec = color::spec_for(color_name);
    net::NetConfig nc;
    nc.in_channels = images.dim(1) == 1 && spec.model == color::ColorModel::rgb ? 1 : 3;
    nc.height = images.dim(2);
    nc.width = images.dim(3);
    nc.channels = args.channels;
    nc.hidden = args.hidden;
    nc.stem_stride = args.stem_stride;
    net::SpikingNet net(nc, args.seed);
    for (const auto& mode_name : args.modes) {
      codec::EncoderConfig enc;
      enc.mode = codec::parse_mode(mode_name);
      enc.model = spec;
      enc.timesteps = args.timesteps;
      double total_ms = 0.0;
      std::size_t t_prime = 0;
      for (std::size_t r = 0; r < args.repeats; ++r) {
        for (std::size_t b = 0; b < args.batches; ++b) {
          const std::size_t first = b * args.batch_size;
          IntTensor batch(Shape{args.batch_size, images.dim(1), images.dim(2), images.dim(3)},
                          std::vector<IntTensor::value_type>(
                              images.data().begin() + first * per,
                              images.data().begin() + (first + args.batch_size) * per));
          enc.seed = rng::hash(args.seed, r, b);
          const auto t0 = std::chrono::steady_clock::now();
          const auto spikes = codec::encode(batch, enc);
          net.reset();
          const Tensor logits = net.forward(spikes);
          const auto t1 = std::chrono::steady_clock::now();
          total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
          t_prime = spikes.steps();
          (void)logits;
        }
      }
      net.reset();
      cells.push_back({std::string(codec::mode_name(enc.mode)), std::string(color::model_name(spec.model)), t_prime,
                       total_ms / static_cast<double>(args.repeats * args.batches)});
    }
  }

  std::string csv = "mode,color,t_prime,repeats,mean_ms,overhead_pct\n";
  for (const auto& c : cells) {
    auto base = std::find_if(cells.begin(), cells.end(),
                             [&](const Cell& o) { return o.color == c.color && o.mode == "rate"; });
    const std::string overhead =
        base != cells.end() ? fmt(100.0 * (c.mean_ms - base->mean_ms) / base->mean_ms, "%.2f") : std::string();
    csv += c.mode + ',' + c.color + ',' + std::to_string(c.t_prime) + ',' + std::to_string(args.repeats) + ',' +
           fmt(c.mean_ms, "%.4f") + ',' + overhead + '\n';
  }
  write_text(args.out, csv);
  std::cout << csv;
  return 0;
}

}  // namespace bpsnn::cli
