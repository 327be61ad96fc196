#include "bpsnn/spike_file.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>

namespace bpsnn::codec {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_spikes(const SpikeTrain& train) {
  if (train.shape.size() != 5) throw std::invalid_argument("spike train must be 5-D, got " + shape_str(train.shape));
  std::vector<std::uint8_t> out{'S', 'P', 'K', 'T', 1, static_cast<std::uint8_t>(train.kind), 0, 0};
  for (std::size_t d : train.shape) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("spike train dimension too large");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  const std::size_t n = train.spikes.size();
  out.resize(kSpikeHeaderBytes + (n + 7) / 8, 0);
  std::uint8_t* body = out.data() + kSpikeHeaderBytes;
  for (std::size_t i = 0; i < n; ++i) {
    if (train.spikes[i] > 1) throw std::invalid_argument("spike values must be binary");
    if (train.spikes[i]) body[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

SpikeTrain deserialize_spikes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSpikeHeaderBytes) throw std::runtime_error("SPKT: truncated header");
  if (bytes[0] != 'S' || bytes[1] != 'P' || bytes[2] != 'K' || bytes[3] != 'T') throw std::runtime_error("SPKT: bad magic");
  if (bytes[4] != 1) throw std::runtime_error("SPKT: unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] > 2) throw std::runtime_error("SPKT: unknown kind " + std::to_string(bytes[5]));

  SpikeTrain train;
  train.kind = static_cast<EncodeMode>(bytes[5]);
  std::size_t n = 1;
  for (std::size_t i = 0; i < 5; ++i) {
    const std::size_t d = get_u32(bytes, 8 + 4 * i);
    if (d == 0) throw std::runtime_error("SPKT: zero dimension");
    if (n > (bytes.size() * 8) / d) throw std::runtime_error("SPKT: payload size mismatch");
    train.shape.push_back(d);
    n *= d;
  }
  if (bytes.size() != kSpikeHeaderBytes + (n + 7) / 8) throw std::runtime_error("SPKT: payload size mismatch");
  train.spikes.resize(n);
  const std::uint8_t* body = bytes.data() + kSpikeHeaderBytes;
  for (std::size_t i = 0; i < n; ++i) train.spikes[i] = (body[i / 8] >> (7 - i % 8)) & 1u;
  return train;
}

void write_spike_file(const std::filesystem::path& path, const SpikeTrain& train) {
  const auto bytes = serialize_spikes(train);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SpikeTrain read_spike_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_spikes(bytes);
}

}  // namespace bpsnn::codec
