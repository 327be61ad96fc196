#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "bpsnn/codec.hpp"
#include "bpsnn/spike_file.hpp"

using namespace bpsnn;
using namespace bpsnn::codec;

namespace {

IntTensor random_images(Shape shape, std::uint64_t seed, int hi = 255) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> d(0, hi);
  std::vector<int> v(shape_numel(shape));
  for (int& x : v) x = d(gen);
  return IntTensor(std::move(shape), std::move(v));
}

IntTensor constant_images(Shape shape, int value) {
  return IntTensor(shape, std::vector<int>(shape_numel(shape), value));
}

EncoderConfig config(EncodeMode mode, std::size_t t = 10, std::uint64_t seed = 1, const char* model = "rgb") {
  EncoderConfig c;
  c.mode = mode;
  c.timesteps = t;
  c.seed = seed;
  c.model = color::spec_for(model);
  return c;
}

// Spike of plane t at flat pixel index i.
int at(const SpikeTrain& s, std::size_t t, std::size_t i) { return s.spikes[t * s.frame_size() + i]; }

}  // namespace

TEST(Bitplane, Examples) {
  const auto spec3 = color::make_spec(color::ColorModel::rgb, {5, 5, 5});
  ASSERT_EQ(spec3.n_bit, 3);
  const auto five = bitplane_encode(IntTensor({1, 1, 1, 1}, {5}), spec3);
  EXPECT_EQ(five.spikes, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(five.kind, EncodeMode::bitplane);

  const auto three = bitplane_encode(IntTensor({1, 1, 1, 1}, {3}), color::spec_for("rgb"));
  EXPECT_EQ(three.spikes, (std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(three.shape, (Shape{8, 1, 1, 1, 1}));
}

TEST(Bitplane, ReconstructsRandomImages) {
  const auto x = random_images({4, 3, 7, 5}, 11);
  const auto planes = bitplane_encode(x, color::spec_for("rgb"));
  // Sum of 2^k * plane_k evaluated here directly.
  for (std::size_t i = 0; i < x.numel(); ++i) {
    int v = 0;
    for (std::size_t k = 0; k < planes.steps(); ++k) v += at(planes, k, i) << k;
    ASSERT_EQ(v, x[i]);
  }
  EXPECT_EQ(reconstruct(planes), x);
}

TEST(Bitplane, Errors) {
  EXPECT_THROW(bitplane_encode(IntTensor({1, 1, 1, 1}, {101}), color::spec_for("cmy")), std::invalid_argument);
  // 256 is beyond 8 bits even though ceil(log2(256)) = 8.
  const auto spec = color::make_spec(color::ColorModel::rgb, {256, 256, 256});
  EXPECT_THROW(bitplane_encode(IntTensor({1, 1, 1, 1}, {256}), spec), std::invalid_argument);
  EXPECT_THROW(bitplane_encode(IntTensor({4}, {1, 2, 3, 4}), color::spec_for("rgb")), std::invalid_argument);
}

TEST(Rate, DegenerateProbabilities) {
  const auto black = rate_encode(constant_images({2, 1, 4, 4}, 0), config(EncodeMode::rate));
  EXPECT_EQ(black.spike_count(), 0u);
  const auto white = rate_encode(constant_images({2, 1, 4, 4}, 255), config(EncodeMode::rate));
  EXPECT_EQ(white.spike_count(), white.spikes.size());
  EXPECT_EQ(white.shape, (Shape{10, 2, 1, 4, 4}));
}

TEST(Rate, BinomialStatistics) {
  // P = 128/255 ~ 0.502, T=10 over 10,000 pixels: 100,000 draws.
  const auto x = constant_images({1, 1, 100, 100}, 128);
  const auto s = rate_encode(x, config(EncodeMode::rate, 10, 99));
  const double n = static_cast<double>(s.spikes.size());
  const double p = 128.0 / 255.0;
  const double sigma = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(s.spike_count()) / n, p, 3 * sigma);
}

TEST(Rate, DeterministicAndSeedSensitive) {
  const auto x = random_images({3, 1, 6, 6}, 12);
  const auto a = rate_encode(x, config(EncodeMode::rate, 10, 5));
  const auto b = rate_encode(x, config(EncodeMode::rate, 10, 5));
  const auto c = rate_encode(x, config(EncodeMode::rate, 10, 6));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.spikes, c.spikes);
}

TEST(Rate, WorkerCountDoesNotChangeOutput) {
  const auto x = random_images({7, 3, 5, 5}, 13);
  auto cfg = config(EncodeMode::rate, 10, 8);
  const auto one = rate_encode(x, cfg);
  for (std::size_t w : {2u, 3u, 4u, 16u}) {
    cfg.workers = w;
    EXPECT_EQ(rate_encode(x, cfg), one) << w << " workers";
  }
}

TEST(Rate, ScalesByModelMaximum) {
  // In CMY space x_max = 100; a value of 100 always fires.
  const auto s = rate_encode(constant_images({1, 3, 2, 2}, 100), config(EncodeMode::rate, 5, 1, "cmy"));
  EXPECT_EQ(s.spike_count(), s.spikes.size());
}

TEST(Combined, StepCounts) {
  const auto x = random_images({2, 3, 4, 4}, 14);
  EXPECT_EQ(encode(x, config(EncodeMode::combined)).steps(), 18u);
  EXPECT_EQ(encode(x, config(EncodeMode::combined, 10, 1, "hsl")).steps(), 19u);
  EXPECT_EQ(encode(x, config(EncodeMode::combined, 10, 1, "cmy")).steps(), 17u);
  EXPECT_EQ(encode(x, config(EncodeMode::bitplane)).steps(), 8u);
  EXPECT_EQ(encode(x, config(EncodeMode::rate, 7)).steps(), 7u);
  EXPECT_EQ(time_steps(config(EncodeMode::combined, 10, 1, "hsv")), 19u);
}

TEST(Combined, OrderingAndComposition) {
  const auto x = random_images({2, 3, 4, 4}, 15);
  for (const char* model : {"rgb", "hsv", "lab"}) {
    const auto cfg = config(EncodeMode::combined, 10, 3, model);
    const auto combined = combined_encode(x, cfg);
    const auto converted = prepare_input(x, cfg.model);
    const auto rate = rate_encode(converted, cfg);
    const auto planes = bitplane_encode(converted, cfg.model);
    EXPECT_EQ(combined.slice_steps(0, 10).spikes, rate.spikes);
    EXPECT_EQ(combined.slice_steps(10, cfg.model.n_bit).spikes, planes.spikes);
    EXPECT_EQ(combined.spike_count(), rate.spike_count() + planes.spike_count());
    EXPECT_EQ(combined.kind, EncodeMode::combined);
  }
}

TEST(Combined, ZeroImage) {
  const auto zero = constant_images({1, 1, 3, 3}, 0);
  EXPECT_EQ(encode(zero, config(EncodeMode::bitplane)).spike_count(), 0u);
  EXPECT_EQ(encode(zero, config(EncodeMode::combined)).spike_count(), 0u);
}

TEST(PrepareInput, GrayscaleHandling) {
  const auto gray = random_images({2, 1, 3, 3}, 16);
  EXPECT_EQ(prepare_input(gray, color::spec_for("rgb")), gray);
  const auto hsv = prepare_input(gray, color::spec_for("hsv"));
  EXPECT_EQ(hsv.shape(), (Shape{2, 3, 3, 3}));
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t p = 0; p < 9; ++p) EXPECT_EQ(hsv[(b * 3 + 1) * 9 + p], 0);  // saturation
  EXPECT_THROW(prepare_input(IntTensor({1, 2, 1, 1}, {0, 0}), color::spec_for("rgb")), std::invalid_argument);
  EXPECT_THROW(prepare_input(IntTensor({1, 1, 1, 1}, {256}), color::spec_for("rgb")), std::invalid_argument);
}

TEST(SpikeTrain, Views) {
  const auto x = random_images({3, 1, 2, 2}, 17);
  const auto s = encode(x, config(EncodeMode::combined));
  const auto one = s.sample(1);
  EXPECT_EQ(one.shape, (Shape{18, 1, 1, 2, 2}));
  for (std::size_t t = 0; t < 18; ++t)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(at(one, t, i), at(s, t, 4 + i));
  const Tensor f = s.frame(2);
  EXPECT_EQ(f.shape(), (Shape{3, 1, 2, 2}));
  EXPECT_EQ(f[5], at(s, 2, 5));
  EXPECT_EQ(s.to_tensor().shape(), s.shape);
  EXPECT_THROW(s.frame(18), std::out_of_range);
  EXPECT_THROW(s.sample(3), std::out_of_range);
  EXPECT_THROW(parse_mode("latency"), std::invalid_argument);
}

TEST(SpikeFile, HeaderAndPacking) {
  SpikeTrain s;
  s.kind = EncodeMode::bitplane;
  s.shape = {1, 1, 1, 1, 10};
  s.spikes = {1, 0, 1, 0, 0, 0, 0, 1, 1, 1};
  const auto bytes = serialize_spikes(s);
  ASSERT_EQ(bytes.size(), kSpikeHeaderBytes + 2);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SPKT");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 1);
  EXPECT_EQ(bytes[6], 0);
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(bytes[24], 10);  // W, little-endian
  EXPECT_EQ(bytes[28], 0b10100001);
  EXPECT_EQ(bytes[29], 0b11000000);
  EXPECT_EQ(deserialize_spikes(bytes), s);
}

TEST(SpikeFile, RoundTripAndFuzz) {
  const auto s = encode(random_images({2, 3, 5, 3}, 18), config(EncodeMode::combined, 4, 2, "hsl"));
  auto bytes = serialize_spikes(s);
  EXPECT_EQ(deserialize_spikes(bytes), s);

  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(deserialize_spikes(std::span(bytes.data(), n)), std::runtime_error) << n;
  }
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);
  bad = bytes;
  bad[5] = 7;
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);
  bad = bytes;
  bad[8] = bad[9] = bad[10] = bad[11] = 0xFF;  // huge T'
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);
  bad = bytes;
  bad[12] = bad[13] = bad[14] = bad[15] = 0;
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(deserialize_spikes(bad), std::runtime_error);

  std::mt19937 gen(19);
  for (int i = 0; i < 500; ++i) {
    auto mutated = bytes;
    mutated[gen() % 28] = static_cast<std::uint8_t>(gen());
    try {
      const auto decoded = deserialize_spikes(mutated);
      EXPECT_EQ(decoded.spikes.size(), shape_numel(decoded.shape));
    } catch (const std::runtime_error&) {
    }
  }
}
