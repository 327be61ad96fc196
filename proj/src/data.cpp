#include "bpsnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bpsnn/rng.hpp"

namespace bpsnn::data {
namespace {

constexpr std::uint32_t kMagicLabels = 0x00000801;
constexpr std::uint32_t kMagicImages3 = 0x00000803;
constexpr std::uint32_t kMagicImages4 = 0x00000804;

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw std::runtime_error(std::string(what_) + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error(std::string(what_) + ": truncated file");
  }
  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void Dataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset is empty");
  if (num_classes < 1) throw std::invalid_argument("num_classes must be positive");
  if (images.rank() != 4 || images.dim(0) != labels.size()) {
    throw std::invalid_argument("images " + shape_str(images.shape()) + " do not match " +
                                std::to_string(labels.size()) + " labels");
  }
  if (images.dim(1) != 1 && images.dim(1) != 3) throw std::invalid_argument("images must have 1 or 3 channels");
  if (images.max() > 255) throw std::invalid_argument("pixel values must be in [0, 255]");
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

IntTensor parse_idx_images(std::span<const std::uint8_t> image_bytes) {
  Reader img(image_bytes, "IDX images");
  const std::uint32_t magic = img.u32();
  if (magic != kMagicImages3 && magic != kMagicImages4) throw std::runtime_error("IDX images: bad magic");
  Shape shape{img.u32(), 1, 0, 0};
  if (magic == kMagicImages4) shape[1] = img.u32();
  shape[2] = img.u32();
  shape[3] = img.u32();
  if (shape[1] != 1 && shape[1] != 3) throw std::runtime_error("IDX images: channel count must be 1 or 3");
  if (shape[0] == 0 || shape[2] == 0 || shape[3] == 0) throw std::runtime_error("IDX images: zero dimension");
  const std::size_t avail = image_bytes.size();
  if (shape[2] > avail / shape[3]) throw std::runtime_error("IDX images: truncated file");
  const std::size_t per_image = shape[1] * shape[2] * shape[3];
  if (per_image > avail || shape[0] > avail / per_image) throw std::runtime_error("IDX images: truncated file");
  const auto pixels = img.take(shape[0] * per_image);
  img.finish();
  IntTensor images(shape, std::vector<IntTensor::value_type>(pixels.begin(), pixels.end()));
  return images;
}

IntTensor load_idx_images(const std::filesystem::path& images_path) { return parse_idx_images(read_file(images_path)); }

Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  int num_classes) {
  IntTensor images = parse_idx_images(image_bytes);
  const Shape shape = images.shape();

  Reader lab(label_bytes, "IDX labels");
  if (lab.u32() != kMagicLabels) throw std::runtime_error("IDX labels: bad magic");
  const std::size_t n = lab.u32();
  if (n != shape[0]) {
    throw std::runtime_error("IDX count mismatch: " + std::to_string(shape[0]) + " images, " + std::to_string(n) +
                             " labels");
  }
  const auto raw_labels = lab.take(n);
  lab.finish();

  Dataset ds;
  ds.images = std::move(images);
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  ds.num_classes = num_classes;
  try {
    ds.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("IDX: ") + e.what());
  }
  return ds;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, int num_classes) {
  return parse_idx(read_file(images_path), read_file(labels_path), num_classes);
}

std::vector<std::uint8_t> idx_image_bytes(const Dataset& ds) {
  ds.validate();
  std::vector<std::uint8_t> out;
  const auto& s = ds.images.shape();
  const bool gray = s[1] == 1;
  put_u32(out, gray ? kMagicImages3 : kMagicImages4);
  put_u32(out, static_cast<std::uint32_t>(s[0]));
  if (!gray) put_u32(out, static_cast<std::uint32_t>(s[1]));
  put_u32(out, static_cast<std::uint32_t>(s[2]));
  put_u32(out, static_cast<std::uint32_t>(s[3]));
  for (auto v : ds.images.data()) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

std::vector<std::uint8_t> idx_label_bytes(const Dataset& ds) {
  ds.validate();
  if (ds.num_classes > 256) throw std::invalid_argument("IDX labels hold at most 256 classes");
  std::vector<std::uint8_t> out;
  put_u32(out, kMagicLabels);
  put_u32(out, static_cast<std::uint32_t>(ds.size()));
  for (int l : ds.labels) out.push_back(static_cast<std::uint8_t>(l));
  return out;
}

void write_idx(const Dataset& ds, const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  write_file(images_path, idx_image_bytes(ds));
  write_file(labels_path, idx_label_bytes(ds));
}

Dataset synthetic(std::size_t n, int classes, std::uint64_t seed, std::size_t height, std::size_t width) {
  if (classes < 2 || classes > 81) throw std::invalid_argument("synthetic: classes must be in [2, 81]");
  if (n < static_cast<std::size_t>(classes)) throw std::invalid_argument("synthetic: n must be at least classes");
  if (height < 2 || width < 2) throw std::invalid_argument("synthetic: images must be at least 2x2");

  // Quadrant q of class c takes level digit q of c in base 3.
  constexpr int kLevels[] = {30, 130, 230};
  constexpr int kNoise = 40;
  rng::Engine engine(seed);
  Dataset ds;
  ds.num_classes = classes;
  std::vector<IntTensor::value_type> pixels;
  pixels.reserve(n * height * width);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    ds.labels.push_back(c);
    int level[4];
    for (int q = 0, d = c; q < 4; ++q, d /= 3) level[q] = kLevels[d % 3];
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const int q = (y >= height / 2 ? 2 : 0) + (x >= width / 2 ? 1 : 0);
        const int noise = static_cast<int>(rng::below(engine, 2 * kNoise + 1)) - kNoise;
        pixels.push_back(std::clamp(level[q] + noise, 0, 255));
      }
    }
  }
  ds.images = IntTensor({n, 1, height, width}, std::move(pixels));
  return ds;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("subset: no indices");
  Dataset out;
  out.num_classes = ds.num_classes;
  out.images = batch_images(ds, indices);
  for (std::size_t i : indices) out.labels.push_back(ds.labels.at(i));
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_frac,
                                                                            std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw std::invalid_argument("train fraction must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_frac));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split of " + std::to_string(n) + " samples leaves one side empty");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng::Engine engine(seed);
  rng::shuffle(std::span<std::size_t>(perm), engine);
  return {std::vector<std::size_t>(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train)),
          std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end())};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  ds.validate();
  auto [train, val] = split_indices(ds.size(), train_frac, seed);
  return {subset(ds, train), subset(ds, val)};
}

Dataset to_rgb(const Dataset& ds) {
  if (ds.images.rank() != 4 || ds.images.dim(1) != 1) throw std::invalid_argument("to_rgb needs a 1-channel dataset");
  const auto& s = ds.images.shape();
  const std::size_t plane = s[2] * s[3];
  std::vector<IntTensor::value_type> out;
  out.reserve(ds.images.numel() * 3);
  const auto in = ds.images.data();
  for (std::size_t i = 0; i < s[0]; ++i) {
    for (int c = 0; c < 3; ++c) out.insert(out.end(), in.begin() + i * plane, in.begin() + (i + 1) * plane);
  }
  Dataset rgb = ds;
  rgb.images = IntTensor({s[0], 3, s[2], s[3]}, std::move(out));
  return rgb;
}

IntTensor batch_images(const Dataset& ds, std::span<const std::size_t> indices) {
  const auto& s = ds.images.shape();
  const std::size_t per = s[1] * s[2] * s[3];
  std::vector<IntTensor::value_type> out;
  out.reserve(indices.size() * per);
  const auto in = ds.images.data();
  for (std::size_t i : indices) {
    if (i >= s[0]) throw std::out_of_range("sample index " + std::to_string(i) + " out of range");
    out.insert(out.end(), in.begin() + i * per, in.begin() + (i + 1) * per);
  }
  return IntTensor({indices.size(), s[1], s[2], s[3]}, std::move(out));
}

}  // namespace bpsnn::data
