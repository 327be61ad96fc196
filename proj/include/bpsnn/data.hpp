#pragma once

// Datasets: IDX ingestion and export, a synthetic toy task, deterministic
// train/validation splits and grayscale to three-channel replication.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "bpsnn/int_tensor.hpp"

namespace bpsnn::data {

struct Dataset {
  IntTensor images;  // (N, C, H, W), values in [0, 255]
  std::vector<int> labels;
  int num_classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

// Big-endian IDX. Images: magic 0x00000803 (N, H, W) or 0x00000804
// (N, C, H, W) with C in {1, 3}. Labels: magic 0x00000801 (N).
Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  int num_classes = 10);
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 int num_classes = 10);

// Images only, without labels.
IntTensor parse_idx_images(std::span<const std::uint8_t> image_bytes);
IntTensor load_idx_images(const std::filesystem::path& images_path);

// C = 1 is written as 0x803, C = 3 as 0x804.
std::vector<std::uint8_t> idx_image_bytes(const Dataset& ds);
std::vector<std::uint8_t> idx_label_bytes(const Dataset& ds);
void write_idx(const Dataset& ds, const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

// Balanced labels (round robin), one mean intensity per quadrant per class,
// plus uniform pixel noise. n >= classes.
Dataset synthetic(std::size_t n, int classes, std::uint64_t seed, std::size_t height = 28, std::size_t width = 28);

// Rows of `ds` in the order given by `indices`.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

// Fisher-Yates permutation from an mt19937_64 seeded with `seed`; the first
// floor(N * train_frac) indices go to train.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_frac,
                                                                            std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed);

Dataset to_rgb(const Dataset& ds);

// Images at `indices` as a (indices.size(), C, H, W) tensor.
IntTensor batch_images(const Dataset& ds, std::span<const std::size_t> indices);

}  // namespace bpsnn::data
