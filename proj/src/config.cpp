#include "bpsnn/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "bpsnn/colorspace.hpp"

namespace bpsnn {

using nlohmann::json;

namespace {

void check_object(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw std::invalid_argument("expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw std::invalid_argument("expected a number");
    } else {
      if (!it->is_string()) throw std::invalid_argument("expected a string");
    }
    out = it->get<T>();
  } catch (const std::exception& e) {
    throw std::invalid_argument("config key '" + where + "." + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void RunConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (timesteps < 1) throw std::invalid_argument("timesteps must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must be in (0, 1)");
  if (!(optimizer.lr > 0.0)) throw std::invalid_argument("optimizer.lr must be positive");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) || !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw std::invalid_argument("optimizer betas must be in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw std::invalid_argument("optimizer.eps must be positive");
  color::parse_model(color);
  if (dataset.synthetic) {
    if (dataset.synthetic_n < static_cast<std::size_t>(dataset.synthetic_classes) || dataset.synthetic_classes < 2) {
      throw std::invalid_argument("synthetic dataset needs n >= classes >= 2");
    }
  } else if (dataset.images.empty() || dataset.labels.empty()) {
    throw std::invalid_argument("dataset needs both 'images' and 'labels' paths, or 'synthetic'");
  }
  network.surrogate.validate();
  if (!(network.v_reset < network.v_threshold)) throw std::invalid_argument("network.v_reset must be below v_threshold");
  if (network.channels < 1 || network.hidden < 1 || network.stem_stride < 1) {
    throw std::invalid_argument("network sizes must be positive");
  }
  if (!(network.init_gain > 0.0)) throw std::invalid_argument("network.init_gain must be positive");
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  check_object(doc, "config",
               {"dataset", "encoder", "network", "optimizer", "epochs", "batch_size", "train_fraction", "seed",
                "split_seed", "eval_seed", "snr", "timing", "save_weights", "output_dir"});

  if (auto it = doc.find("dataset"); it != doc.end()) {
    const json& d = *it;
    check_object(d, "dataset", {"images", "labels", "num_classes", "limit", "synthetic"});
    std::string images, labels;
    read(d, "images", images, "dataset");
    read(d, "labels", labels, "dataset");
    if (!images.empty()) cfg.dataset.images = resolve(base_dir, images);
    if (!labels.empty()) cfg.dataset.labels = resolve(base_dir, labels);
    read(d, "num_classes", cfg.dataset.num_classes, "dataset");
    read(d, "limit", cfg.dataset.limit, "dataset");
    if (auto s = d.find("synthetic"); s != d.end()) {
      check_object(*s, "dataset.synthetic", {"n", "classes", "seed", "height", "width"});
      cfg.dataset.synthetic = true;
      read(*s, "n", cfg.dataset.synthetic_n, "dataset.synthetic");
      read(*s, "classes", cfg.dataset.synthetic_classes, "dataset.synthetic");
      read(*s, "seed", cfg.dataset.synthetic_seed, "dataset.synthetic");
      read(*s, "height", cfg.dataset.synthetic_height, "dataset.synthetic");
      read(*s, "width", cfg.dataset.synthetic_width, "dataset.synthetic");
      if (!images.empty() || !labels.empty()) {
        throw std::invalid_argument("dataset: give either IDX paths or 'synthetic', not both");
      }
    }
  }

  if (auto it = doc.find("encoder"); it != doc.end()) {
    check_object(*it, "encoder", {"mode", "color", "timesteps", "workers"});
    std::string mode;
    read(*it, "mode", mode, "encoder");
    if (!mode.empty()) cfg.mode = codec::parse_mode(mode);
    read(*it, "color", cfg.color, "encoder");
    read(*it, "timesteps", cfg.timesteps, "encoder");
    read(*it, "workers", cfg.workers, "encoder");
  }

  if (auto it = doc.find("network"); it != doc.end()) {
    const json& n = *it;
    check_object(n, "network",
                 {"channels", "hidden", "stem_stride", "join", "v_threshold", "v_reset", "init_gain", "surrogate"});
    read(n, "channels", cfg.network.channels, "network");
    read(n, "hidden", cfg.network.hidden, "network");
    read(n, "stem_stride", cfg.network.stem_stride, "network");
    std::string join;
    read(n, "join", join, "network");
    if (!join.empty()) cfg.network.join = net::parse_join(join);
    read(n, "v_threshold", cfg.network.v_threshold, "network");
    read(n, "v_reset", cfg.network.v_reset, "network");
    read(n, "init_gain", cfg.network.init_gain, "network");
    if (auto s = n.find("surrogate"); s != n.end()) {
      check_object(*s, "network.surrogate", {"family", "alpha"});
      std::string family;
      read(*s, "family", family, "network.surrogate");
      if (!family.empty()) cfg.network.surrogate.family = neuron::parse_family(family);
      read(*s, "alpha", cfg.network.surrogate.alpha, "network.surrogate");
    }
  }

  if (auto it = doc.find("optimizer"); it != doc.end()) {
    check_object(*it, "optimizer", {"lr", "beta1", "beta2", "eps"});
    read(*it, "lr", cfg.optimizer.lr, "optimizer");
    read(*it, "beta1", cfg.optimizer.beta1, "optimizer");
    read(*it, "beta2", cfg.optimizer.beta2, "optimizer");
    read(*it, "eps", cfg.optimizer.eps, "optimizer");
  }

  read(doc, "epochs", cfg.epochs, "config");
  read(doc, "batch_size", cfg.batch_size, "config");
  read(doc, "train_fraction", cfg.train_fraction, "config");
  read(doc, "seed", cfg.seed, "config");
  read(doc, "split_seed", cfg.split_seed, "config");
  read(doc, "eval_seed", cfg.eval_seed, "config");
  read(doc, "snr", cfg.snr, "config");
  read(doc, "timing", cfg.timing, "config");
  read(doc, "save_weights", cfg.save_weights, "config");
  std::string out;
  read(doc, "output_dir", out, "config");
  if (!out.empty()) cfg.output_dir = out;

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json to_json(const RunConfig& cfg) {
  json dataset;
  if (cfg.dataset.synthetic) {
    dataset["synthetic"] = {{"n", cfg.dataset.synthetic_n},
                            {"classes", cfg.dataset.synthetic_classes},
                            {"seed", cfg.dataset.synthetic_seed},
                            {"height", cfg.dataset.synthetic_height},
                            {"width", cfg.dataset.synthetic_width}};
  } else {
    dataset["images"] = cfg.dataset.images.string();
    dataset["labels"] = cfg.dataset.labels.string();
    dataset["num_classes"] = cfg.dataset.num_classes;
    dataset["limit"] = cfg.dataset.limit;
  }
  const auto& n = cfg.network;
  return {
      {"dataset", dataset},
      {"encoder",
       {{"mode", codec::mode_name(cfg.mode)},
        {"color", cfg.color},
        {"timesteps", cfg.timesteps},
        {"workers", cfg.workers}}},
      {"network",
       {{"channels", n.channels},
        {"hidden", n.hidden},
        {"stem_stride", n.stem_stride},
        {"join", net::join_name(n.join)},
        {"v_threshold", n.v_threshold},
        {"v_reset", n.v_reset},
        {"init_gain", n.init_gain},
        {"surrogate", {{"family", neuron::family_name(n.surrogate.family)}, {"alpha", n.surrogate.alpha}}}}},
      {"optimizer",
       {{"lr", cfg.optimizer.lr},
        {"beta1", cfg.optimizer.beta1},
        {"beta2", cfg.optimizer.beta2},
        {"eps", cfg.optimizer.eps}}},
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"train_fraction", cfg.train_fraction},
      {"seed", cfg.seed},
      {"split_seed", cfg.split_seed},
      {"eval_seed", cfg.eval_seed},
      {"snr", cfg.snr},
      {"timing", cfg.timing},
      {"save_weights", cfg.save_weights},
      {"output_dir", cfg.output_dir.string()},
  };
}

}  // namespace bpsnn
