#pragma once

// Run configuration: a JSON document with a fixed schema. Unknown keys are
// rejected so a typo never silently falls back to a default.
//
// {
//   "dataset":   {"images": path, "labels": path, "num_classes": 10, "limit": 0}
//             or {"synthetic": {"n": 200, "classes": 4, "seed": 1, "height": 8, "width": 8}},
//   "encoder":   {"mode": "combined", "color": "rgb", "timesteps": 10, "workers": 1},
//   "network":   {"channels": 16, "hidden": 128, "stem_stride": 1, "join": "add",
//                 "v_threshold": 1.0, "v_reset": 0.0, "init_gain": 1.0,
//                 "surrogate": {"family": "arctan", "alpha": 2.0}},
//   "optimizer": {"lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
//   "epochs": 20, "batch_size": 16, "train_fraction": 0.8,
//   "seed": 0, "split_seed": 0, "eval_seed": 12345,
//   "snr": false, "timing": true, "save_weights": true,
//   "output_dir": "runs/example"
// }
//
// Relative dataset paths resolve against the config file's directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "bpsnn/codec.hpp"
#include "bpsnn/network.hpp"

namespace bpsnn {

struct DatasetSource {
  std::filesystem::path images;
  std::filesystem::path labels;
  int num_classes = 10;
  std::size_t limit = 0;  // 0 keeps every sample

  bool synthetic = false;
  std::size_t synthetic_n = 200;
  int synthetic_classes = 4;
  std::uint64_t synthetic_seed = 1;
  std::size_t synthetic_height = 8;
  std::size_t synthetic_width = 8;
};

struct OptimizerConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct RunConfig {
  DatasetSource dataset;

  codec::EncodeMode mode = codec::EncodeMode::combined;
  std::string color = "rgb";
  std::size_t timesteps = 10;
  std::size_t workers = 1;

  // in_channels, height, width and num_classes are filled from the dataset.
  net::NetConfig network;
  OptimizerConfig optimizer;

  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t eval_seed = 12345;
  bool snr = false;
  // When false, epoch_ms is written as 0 so history.csv is byte-reproducible.
  bool timing = true;
  bool save_weights = true;
  std::filesystem::path output_dir = "run";

  void validate() const;
};

// Throws std::invalid_argument on unknown keys, wrong types or bad values.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace bpsnn
