#include "bpsnn/network.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <iterator>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "bpsnn/ops.hpp"
#include "bpsnn/rng.hpp"

namespace bpsnn::net {

using nlohmann::json;

SewJoin parse_join(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "add") return SewJoin::add;
  if (lower == "and") return SewJoin::and_;
  if (lower == "iand") return SewJoin::iand;
  throw std::invalid_argument("unknown SEW join '" + std::string(name) + "' (expected add, and or iand)");
}

std::string_view join_name(SewJoin join) {
  switch (join) {
    case SewJoin::add: return "add";
    case SewJoin::and_: return "and";
    case SewJoin::iand: return "iand";
  }
  return "?";
}

Tensor sew_join(const Tensor& a, const Tensor& s, SewJoin g) {
  if (a.shape() != s.shape()) {
    throw std::invalid_argument("sew_join: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(s.shape()));
  }
  if (g != SewJoin::add) {
    const auto values = a.data();
    if (std::any_of(values.begin(), values.end(), [](double v) { return v != 0.0 && v != 1.0; })) {
      throw std::invalid_argument("sew_join: AND/IAND need a binary residual output");
    }
  }
  switch (g) {
    case SewJoin::add: return add(a, s);
    case SewJoin::and_: return mul(a, s);
    case SewJoin::iand: return mul(add(mul(a, -1.0), 1.0), s);
  }
  throw std::invalid_argument("unknown SEW join");
}

void NetConfig::validate() const {
  if (in_channels == 0 || height == 0 || width == 0 || num_classes < 2 || channels == 0 || hidden == 0 ||
      stem_stride == 0) {
    throw std::invalid_argument("network dimensions must be positive (and at least 2 classes)");
  }
  const std::size_t h = (height - 1) / stem_stride + 1;
  const std::size_t w = (width - 1) / stem_stride + 1;
  if (h % 2 != 0 || w % 2 != 0) {
    throw std::invalid_argument("feature map " + std::to_string(h) + "x" + std::to_string(w) +
                                " after the stem is not divisible by the 2x2 pool");
  }
  if (!(v_reset < v_threshold)) throw std::invalid_argument("v_reset must be below v_threshold");
  if (!(init_gain > 0.0)) throw std::invalid_argument("init_gain must be positive");
  surrogate.validate();
}

namespace {

enum ParamIndex : std::size_t {
  kStemW, kStemB, kConvAW, kConvAB, kConvBW, kConvBB, kFc1W, kFc1B, kFc2W, kFc2B, kParamCount
};

constexpr const char* kLayerNames[] = {"stem", "block.a", "block.b", "fc1"};

Tensor uniform_tensor(Shape shape, double bound, rng::Engine& engine) {
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = (2.0 * rng::uniform(engine) - 1.0) * bound;
  return Tensor(std::move(shape), std::move(values), true);
}

}  // namespace

SpikingNet::SpikingNet(NetConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  const std::size_t h = (c.height - 1) / c.stem_stride + 1;
  const std::size_t w = (c.width - 1) / c.stem_stride + 1;
  const std::size_t flat = c.channels * (h / 2) * (w / 2);

  rng::Engine engine(init_seed);
  auto weight = [&](std::string name, Shape shape, std::size_t fan_in) {
    const double bound = c.init_gain * std::sqrt(6.0 / static_cast<double>(fan_in));
    params_.push_back({std::move(name), uniform_tensor(std::move(shape), bound, engine)});
  };
  auto bias = [&](std::string name, std::size_t n) { params_.push_back({std::move(name), Tensor::zeros({n}, true)}); };

  weight("stem.weight", {c.channels, c.in_channels, 3, 3}, c.in_channels * 9);
  bias("stem.bias", c.channels);
  weight("block.conv_a.weight", {c.channels, c.channels, 3, 3}, c.channels * 9);
  bias("block.conv_a.bias", c.channels);
  weight("block.conv_b.weight", {c.channels, c.channels, 3, 3}, c.channels * 9);
  bias("block.conv_b.bias", c.channels);
  weight("fc1.weight", {c.hidden, flat}, flat);
  bias("fc1.bias", c.hidden);
  weight("fc2.weight", {c.num_classes, c.hidden}, c.hidden);
  bias("fc2.bias", c.num_classes);

  reset();
}

std::size_t SpikingNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

void SpikingNet::reset() {
  states_.assign(std::size(kLayerNames), neuron::IfNeuronState{Tensor{}, config_.v_threshold, config_.v_reset});
}

bool SpikingNet::is_reset() const {
  return std::all_of(states_.begin(), states_.end(), [](const neuron::IfNeuronState& s) { return s.is_reset(); });
}

void SpikingNet::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

std::vector<double> SpikingNet::flat_grad() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& p : params_) {
    if (p.value.has_grad()) {
      out.insert(out.end(), p.value.grad().begin(), p.value.grad().end());
    } else {
      out.insert(out.end(), p.value.numel(), 0.0);
    }
  }
  return out;
}

Tensor SpikingNet::forward(const codec::SpikeTrain& train) { return forward(train.to_tensor()); }

Tensor SpikingNet::forward(const Tensor& train) {
  const auto& c = config_;
  if (train.rank() != 5 || train.dim(2) != c.in_channels || train.dim(3) != c.height || train.dim(4) != c.width) {
    throw std::invalid_argument("forward: train " + shape_str(train.shape()) + " does not match network input (T',B," +
                                std::to_string(c.in_channels) + "," + std::to_string(c.height) + "," +
                                std::to_string(c.width) + ")");
  }
  if (!is_reset()) throw std::logic_error("forward: neuron states were not reset since the last forward");

  activity_.clear();
  for (const char* name : kLayerNames) activity_.push_back({name, 0, 0});

  const std::size_t steps = train.dim(0);
  const Shape frame_shape(train.shape().begin() + 1, train.shape().end());
  const std::size_t frame_size = shape_numel(frame_shape);
  Tensor total;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto first = train.data().begin() + static_cast<std::ptrdiff_t>(t * frame_size);
    Tensor frame(frame_shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(frame_size)));
    Tensor out = step(frame);
    total = total.defined() ? add(total, out) : out;
  }
  return mul(total, 1.0 / static_cast<double>(steps));
}

Tensor SpikingNet::step(const Tensor& frame) {
  const auto& c = config_;
  const std::size_t batch = frame.dim(0);

  auto fire = [&](std::size_t layer, const Tensor& current) {
    auto [spikes, state] = neuron::if_step(states_[layer], current, c.surrogate, c.spike_forward);
    states_[layer] = std::move(state);
    auto& act = activity_[layer];
    for (double v : spikes.data()) act.spikes += v != 0.0 ? 1 : 0;
    act.neuron_steps += spikes.numel();
    return spikes;
  };

  const Tensor s1 = fire(0, conv2d(frame, param(kStemW), param(kStemB), {c.stem_stride, 1}));
  const Tensor sa = fire(1, conv2d(s1, param(kConvAW), param(kConvAB), {1, 1}));
  const Tensor residual = fire(2, conv2d(sa, param(kConvBW), param(kConvBB), {1, 1}));
  const Tensor joined = sew_join(residual, s1, c.join);
  const Tensor pooled = avg_pool2d(joined, 2);
  const Tensor flat = pooled.reshaped({batch, pooled.numel() / batch});
  const Tensor hidden = fire(3, linear(flat, param(kFc1W), param(kFc1B)));
  return linear(hidden, param(kFc2W), param(kFc2B));
}

double firing_rate(const Tensor& spikes) {
  if (!spikes.defined() || spikes.numel() == 0) throw std::invalid_argument("firing_rate of an empty tensor");
  double total = 0.0;
  for (double v : spikes.data()) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("firing_rate expects binary spikes");
    total += v;
  }
  return total / static_cast<double>(spikes.numel());
}

double firing_rate(const codec::SpikeTrain& train) {
  if (train.spikes.empty()) throw std::invalid_argument("firing_rate of an empty spike train");
  return static_cast<double>(train.spike_count()) / static_cast<double>(train.spikes.size());
}

// ---------------------------------------------------------------------------

void save_weights(const SpikingNet& net, const std::filesystem::path& manifest_path) {
  static_assert(std::endian::native == std::endian::little, "weights are written as little-endian f64");
  const auto data_name = manifest_path.stem().string() + ".bin";
  const auto data_path = manifest_path.parent_path() / data_name;

  std::ofstream bin(data_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + data_path.string() + " for writing");
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& p : net.parameters()) {
    const auto values = p.value.data();
    const std::size_t nbytes = values.size() * sizeof(double);
    bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(nbytes));
    tensors.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  if (!bin) throw std::runtime_error("failed writing " + data_path.string());

  const auto& c = net.config();
  json manifest = {
      {"format", "bpsnn-weights"},
      {"version", 1},
      {"dtype", "f64le"},
      {"data_file", data_name},
      {"total_bytes", offset},
      {"network",
       {{"in_channels", c.in_channels},
        {"height", c.height},
        {"width", c.width},
        {"num_classes", c.num_classes},
        {"channels", c.channels},
        {"hidden", c.hidden},
        {"stem_stride", c.stem_stride},
        {"join", join_name(c.join)}}},
      {"tensors", tensors},
  };
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot open " + manifest_path.string() + " for writing");
  out << manifest.dump(2) << '\n';
}

void load_weights(SpikingNet& net, const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open weights manifest " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed weights manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "bpsnn-weights" || manifest.value("dtype", "") != "f64le") {
    throw std::runtime_error("unsupported weights manifest " + manifest_path.string());
  }
  const auto data_path = manifest_path.parent_path() / manifest.at("data_file").get<std::string>();
  std::ifstream bin(data_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open weights data " + data_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  const auto& entries = manifest.at("tensors");
  auto& params = net.parameters();
  if (entries.size() != params.size()) throw std::runtime_error("weights manifest lists a different parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = entries[i];
    if (e.at("name").get<std::string>() != params[i].name || e.at("shape").get<Shape>() != params[i].value.shape()) {
      throw std::runtime_error("weights entry " + e.at("name").get<std::string>() + " does not match parameter " +
                               params[i].name + " " + shape_str(params[i].value.shape()));
    }
    const auto offset = e.at("offset").get<std::size_t>();
    const auto nbytes = e.at("nbytes").get<std::size_t>();
    if (nbytes != params[i].value.numel() * sizeof(double) || offset + nbytes > bytes.size()) {
      throw std::runtime_error("weights data for " + params[i].name + " is truncated or mis-sized");
    }
    auto dst = params[i].value.mutable_data();
    std::memcpy(dst.data(), bytes.data() + offset, nbytes);
  }
}

}  // namespace bpsnn::net
