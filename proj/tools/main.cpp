#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "bpsnn/kernels.hpp"
#include "commands.hpp"

namespace {

int fail(const std::string& command, const std::string& kind, const std::string& message, int code) {
  nlohmann::json err = {{"error", kind}, {"command", command}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

void add_train_overrides(CLI::App* sub, bpsnn::cli::TrainArgs& args) {
  auto& o = args.overrides;
  sub->add_option("--config", args.config, "Run config (JSON)")->required();
  sub->add_option("--mode", o.mode, "Override encoder mode: rate, bitplane or combined");
  sub->add_option("--color", o.color, "Override color model");
  sub->add_option("--seed", o.seed, "Override training seed");
  sub->add_option("--epochs", o.epochs, "Override epoch count");
  sub->add_option("--workers", o.workers, "Override encoder worker threads");
  sub->add_option("--output-dir", o.output_dir, "Override output directory");
  sub->add_option("--timing", o.timing, "Record wall-clock epoch_ms (true/false)");
  sub->add_flag("--quiet", o.quiet, "Only print the final summary");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bpsnn::cli;
  CLI::App app{"Bit-plane and rate spike coding for spiking networks"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel variant: auto, scalar or avx2");

  EncodeArgs encode;
  auto* enc = app.add_subcommand("encode", "Encode images into an SPKT spike file");
  enc->add_option("--input", encode.input, "IDX image file, or a directory holding images.idx")->required();
  enc->add_option("--mode", encode.mode, "rate, bitplane or combined");
  enc->add_option("--color", encode.color, "Color model: rgb, cmy, ycbcr, hsl, hsv, xyz, lab");
  enc->add_option("--timesteps", encode.timesteps, "Rate-coding steps T");
  enc->add_option("--seed", encode.seed, "Rate-coding seed");
  enc->add_option("--limit", encode.limit, "Encode only the first N images (0 = all)");
  enc->add_option("--workers", encode.workers, "Encoder threads");
  enc->add_option("--out", encode.out, "Output SPKT file")->required();

  ConvertArgs convert;
  auto* conv = app.add_subcommand("convert-color", "Convert images to a color model (IDX, int16 values)");
  conv->add_option("--input", convert.input, "IDX image file, or a directory holding images.idx")->required();
  conv->add_option("--color", convert.color, "Target color model")->required();
  conv->add_option("--out", convert.out, "Output IDX file")->required();

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train a network from a run config");
  add_train_overrides(tr, train);
  tr->add_flag("--snr", train.overrides.snr, "Capture per-epoch gradient SNR into snr.csv");

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Evaluate saved weights");
  ev->add_option("--config", eval.config, "Run config (JSON)")->required();
  ev->add_option("--weights", eval.weights, "Weights manifest (weights.json)")->required();
  ev->add_option("--split", eval.split, "train or val");

  TrainArgs snr;
  auto* sr = app.add_subcommand("snr-report", "Train rate, bitplane and combined runs and compare gradient SNR");
  add_train_overrides(sr, snr);

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Time encode + forward per batch for each mode and color");
  be->add_option("--dataset", bench.dataset, "IDX image file, or a directory holding images.idx")->required();
  be->add_option("--modes", bench.modes, "Modes to time")->delimiter(',');
  be->add_option("--colors", bench.colors, "Color models to time")->delimiter(',');
  be->add_option("--repeats", bench.repeats, "Repeats per cell");
  be->add_option("--batches", bench.batches, "Batches per repeat");
  be->add_option("--batch-size", bench.batch_size, "Images per batch");
  be->add_option("--timesteps", bench.timesteps, "Rate-coding steps T");
  be->add_option("--channels", bench.channels, "Network channels");
  be->add_option("--hidden", bench.hidden, "Hidden dense width");
  be->add_option("--stem-stride", bench.stem_stride, "Stride of the first convolution");
  be->add_option("--seed", bench.seed, "Seed for weights and rate noise");
  be->add_option("--out", bench.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name(), "usage", e.what(), 2);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    bpsnn::kernels::select(simd);
    if (*enc) return cmd_encode(encode);
    if (*conv) return cmd_convert_color(convert);
    if (*tr) return cmd_train(train);
    if (*ev) return cmd_eval(eval);
    if (*sr) return cmd_snr_report(snr);
    if (*be) return cmd_bench(bench);
  } catch (const std::invalid_argument& e) {
    return fail(command, "invalid_argument", e.what(), 1);
  } catch (const std::exception& e) {
    return fail(command, "runtime", e.what(), 1);
  }
  return 1;
}
