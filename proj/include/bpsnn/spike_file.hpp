#pragma once

// SPKT: flat binary container for a SpikeTrain.
//
//   offset  size  field
//   0       4     magic "SPKT"
//   4       1     version (1)
//   5       1     kind (0 rate, 1 bitplane, 2 combined)
//   6       2     reserved, zero
//   8       20    u32 T', B, C, H, W (little-endian)
//   28      ...   spikes in (t,b,c,h,w) order, 8 per byte, MSB first,
//                 last byte zero-padded

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bpsnn/codec.hpp"

namespace bpsnn::codec {

inline constexpr std::size_t kSpikeHeaderBytes = 28;

std::vector<std::uint8_t> serialize_spikes(const SpikeTrain& train);
SpikeTrain deserialize_spikes(std::span<const std::uint8_t> bytes);

void write_spike_file(const std::filesystem::path& path, const SpikeTrain& train);
SpikeTrain read_spike_file(const std::filesystem::path& path);

}  // namespace bpsnn::codec
