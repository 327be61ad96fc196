#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpsnn::cli {

struct EncodeArgs {
  std::string input;
  std::string mode = "combined";
  std::string color = "rgb";
  std::size_t timesteps = 10;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  std::size_t workers = 1;
  std::string out;
};

struct ConvertArgs {
  std::string input;
  std::string color;
  std::string out;
};

// Flags given on the command line override the config file.
struct TrainOverrides {
  std::optional<std::string> mode;
  std::optional<std::string> color;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> workers;
  std::optional<std::string> output_dir;
  std::optional<bool> timing;
  bool snr = false;
  bool quiet = false;
};

struct TrainArgs {
  std::string config;
  TrainOverrides overrides;
};

struct EvalArgs {
  std::string config;
  std::string weights;
  std::string split = "val";
};

struct BenchArgs {
  std::string dataset;
  std::vector<std::string> modes{"rate", "bitplane", "combined"};
  std::vector<std::string> colors{"rgb"};
  std::size_t repeats = 3;
  std::size_t batches = 4;
  std::size_t batch_size = 16;
  std::size_t timesteps = 10;
  std::size_t channels = 16;
  std::size_t hidden = 128;
  std::size_t stem_stride = 1;
  std::uint64_t seed = 0;
  std::string out = "bench.csv";
};

int cmd_encode(const EncodeArgs& args);
int cmd_convert_color(const ConvertArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_snr_report(const TrainArgs& args);
int cmd_bench(const BenchArgs& args);

}  // namespace bpsnn::cli
