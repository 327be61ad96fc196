#pragma once

// Desk-scale spiking classifier:
//
//   conv3x3(C_in -> ch, stride s) -> IF
//   SEW block: conv3x3 -> IF -> conv3x3 -> IF  = A ;  out = g(A, S)
//   avgpool 2x2 -> flatten -> dense(hidden) -> IF -> dense(classes)
//
// Logits are the readout pre-activations averaged over all T' steps.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bpsnn/codec.hpp"
#include "bpsnn/neuron.hpp"
#include "bpsnn/tensor.hpp"

namespace bpsnn::net {

enum class SewJoin { add, and_, iand };

SewJoin parse_join(std::string_view name);
std::string_view join_name(SewJoin join);

// ADD: a + s.  AND: a * s.  IAND: (1 - a) * s.  AND/IAND need binary a.
Tensor sew_join(const Tensor& a, const Tensor& s, SewJoin g);

struct NetConfig {
  std::size_t in_channels = 1;
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t num_classes = 10;
  std::size_t channels = 16;
  std::size_t hidden = 128;
  std::size_t stem_stride = 1;
  SewJoin join = SewJoin::add;
  double v_threshold = 1.0;
  double v_reset = 0.0;
  neuron::SurrogateSpec surrogate{};
  neuron::SpikeForward spike_forward = neuron::SpikeForward::heaviside;
  // Uniform init bound is init_gain * sqrt(6 / fan_in).
  double init_gain = 1.0;

  void validate() const;
};

struct NamedParameter {
  std::string name;
  Tensor value;
};

// Spike activity recorded during a forward pass, one entry per IF layer.
struct LayerActivity {
  std::string name;
  std::size_t spikes = 0;
  std::size_t neuron_steps = 0;  // N * T'
};

class SpikingNet {
 public:
  SpikingNet(NetConfig config, std::uint64_t init_seed);

  const NetConfig& config() const noexcept { return config_; }
  std::vector<NamedParameter>& parameters() noexcept { return params_; }
  const std::vector<NamedParameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  // Throws std::logic_error unless reset() ran since the previous forward.
  Tensor forward(const codec::SpikeTrain& train);
  // train: (T', B, C, H, W) real tensor.
  Tensor forward(const Tensor& train);

  void reset();
  bool is_reset() const;

  const std::vector<LayerActivity>& activity() const noexcept { return activity_; }

  void zero_grad();
  // All parameter gradients concatenated in parameter order (zeros where absent).
  std::vector<double> flat_grad() const;

 private:
  Tensor step(const Tensor& frame);
  Tensor& param(std::size_t i) { return params_[i].value; }

  NetConfig config_;
  std::vector<NamedParameter> params_;
  std::vector<neuron::IfNeuronState> states_;
  std::vector<LayerActivity> activity_;
};

// Phi = total spikes / (N * T') for a (T', N...) binary tensor.
double firing_rate(const Tensor& spikes);
double firing_rate(const codec::SpikeTrain& train);

// weights.bin (little-endian f64, parameters back to back) plus a JSON
// manifest listing name, shape, byte offset and byte count of each tensor.
void save_weights(const SpikingNet& net, const std::filesystem::path& manifest_path);
// Loads into an already-constructed net; names and shapes must match.
void load_weights(SpikingNet& net, const std::filesystem::path& manifest_path);

}  // namespace bpsnn::net
