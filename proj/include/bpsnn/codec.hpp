#pragma once

// Spike encoders: Poisson rate coding, bit-plane coding, and their
// concatenation along the time axis (rate steps first, then planes LSB first).

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "bpsnn/colorspace.hpp"
#include "bpsnn/int_tensor.hpp"
#include "bpsnn/tensor.hpp"

namespace bpsnn::codec {

enum class EncodeMode : std::uint8_t { rate = 0, bitplane = 1, combined = 2 };

EncodeMode parse_mode(std::string_view name);
std::string_view mode_name(EncodeMode mode);

// Binary spikes of shape (T', B, C, H, W), stored one byte per spike.
struct SpikeTrain {
  Shape shape;
  std::vector<std::uint8_t> spikes;
  EncodeMode kind = EncodeMode::rate;

  std::size_t steps() const { return shape.at(0); }
  std::size_t frame_size() const { return shape_numel(shape) / shape.at(0); }
  // (B, C, H, W) slice at step t.
  Tensor frame(std::size_t t) const;
  Tensor to_tensor() const;
  std::size_t spike_count() const;
  // Steps [first, first + count).
  SpikeTrain slice_steps(std::size_t first, std::size_t count) const;
  // Sample b of the batch, keeping a batch axis of 1.
  SpikeTrain sample(std::size_t b) const;

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;
};

struct EncoderConfig {
  std::size_t timesteps = 10;
  color::ColorModelSpec model = color::spec_for(color::ColorModel::rgb);
  std::uint64_t seed = 0;
  EncodeMode mode = EncodeMode::combined;
  // Batch shards encoded concurrently by rate_encode; output is identical for
  // any value.
  std::size_t workers = 1;
};

// Steps produced for `mode`: T, n_bit or T + n_bit.
std::size_t time_steps(const EncoderConfig& cfg);

// Brings a raw image batch into the model's integer space. Three-channel
// input is color-converted; single-channel input passes through unchanged
// for rgb (grayscale, x_max 255) and is replicated to three channels first
// for every other model.
IntTensor prepare_input(const IntTensor& x, const color::ColorModelSpec& model);

// x already in the model's space, values <= x_max. Output (n_bit, B, C, H, W);
// plane k holds bit k.
SpikeTrain bitplane_encode(const IntTensor& x, const color::ColorModelSpec& model);

// x already in the model's space. Spike at (t, i) iff u(seed, t, i) < x_i / x_max
// with u a counter-based uniform in [0, 1).
SpikeTrain rate_encode(const IntTensor& x, const EncoderConfig& cfg);

// Concatenates along the time axis.
SpikeTrain concat_time(const SpikeTrain& first, const SpikeTrain& second, EncodeMode kind);

// Raw input; converts once, then rate-encodes and bit-plane-encodes.
SpikeTrain combined_encode(const IntTensor& x_raw, const EncoderConfig& cfg);

// Raw input, dispatching on cfg.mode.
SpikeTrain encode(const IntTensor& x_raw, const EncoderConfig& cfg);

// Sum over planes of 2^k * plane_k, the inverse of bitplane_encode.
IntTensor reconstruct(const SpikeTrain& planes);

}  // namespace bpsnn::codec
