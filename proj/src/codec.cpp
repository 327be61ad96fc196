#include "bpsnn/codec.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "bpsnn/rng.hpp"

namespace bpsnn::codec {

EncodeMode parse_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "rate") return EncodeMode::rate;
  if (lower == "bitplane") return EncodeMode::bitplane;
  if (lower == "combined") return EncodeMode::combined;
  throw std::invalid_argument("unknown encode mode '" + std::string(name) + "' (expected rate, bitplane or combined)");
}

std::string_view mode_name(EncodeMode mode) {
  switch (mode) {
    case EncodeMode::rate: return "rate";
    case EncodeMode::bitplane: return "bitplane";
    case EncodeMode::combined: return "combined";
  }
  return "?";
}

Tensor SpikeTrain::frame(std::size_t t) const {
  if (t >= steps()) throw std::out_of_range("spike train step " + std::to_string(t) + " out of range");
  const std::size_t n = frame_size();
  const auto first = spikes.begin() + static_cast<std::ptrdiff_t>(t * n);
  return Tensor(Shape(shape.begin() + 1, shape.end()), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

Tensor SpikeTrain::to_tensor() const { return Tensor(shape, std::vector<double>(spikes.begin(), spikes.end())); }

std::size_t SpikeTrain::spike_count() const {
  return static_cast<std::size_t>(std::count(spikes.begin(), spikes.end(), std::uint8_t{1}));
}

SpikeTrain SpikeTrain::slice_steps(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > steps()) throw std::out_of_range("spike train step slice out of range");
  SpikeTrain out;
  out.shape = shape;
  out.shape[0] = count;
  out.kind = kind;
  const std::size_t n = frame_size();
  out.spikes.assign(spikes.begin() + static_cast<std::ptrdiff_t>(first * n),
                    spikes.begin() + static_cast<std::ptrdiff_t>((first + count) * n));
  return out;
}

SpikeTrain SpikeTrain::sample(std::size_t b) const {
  const std::size_t batch = shape.at(1);
  if (b >= batch) throw std::out_of_range("spike train sample out of range");
  const std::size_t per_sample = frame_size() / batch;
  SpikeTrain out;
  out.shape = shape;
  out.shape[1] = 1;
  out.kind = kind;
  out.spikes.reserve(steps() * per_sample);
  for (std::size_t t = 0; t < steps(); ++t) {
    const auto first = spikes.begin() + static_cast<std::ptrdiff_t>(t * frame_size() + b * per_sample);
    out.spikes.insert(out.spikes.end(), first, first + static_cast<std::ptrdiff_t>(per_sample));
  }
  return out;
}

std::size_t time_steps(const EncoderConfig& cfg) {
  const auto planes = static_cast<std::size_t>(cfg.model.n_bit);
  switch (cfg.mode) {
    case EncodeMode::rate: return cfg.timesteps;
    case EncodeMode::bitplane: return planes;
    case EncodeMode::combined: return cfg.timesteps + planes;
  }
  return 0;
}

namespace {

void require_image_batch(const IntTensor& x, const char* who) {
  if (x.rank() != 4) throw std::invalid_argument(std::string(who) + " expects (B,C,H,W), got " + shape_str(x.shape()));
}

void require_within(const IntTensor& x, const color::ColorModelSpec& model, const char* who) {
  const auto mx = x.max();
  if (mx > model.x_max) {
    throw std::invalid_argument(std::string(who) + ": value " + std::to_string(mx) + " exceeds x_max " +
                                std::to_string(model.x_max));
  }
}

}  // namespace

IntTensor prepare_input(const IntTensor& x, const color::ColorModelSpec& model) {
  require_image_batch(x, "prepare_input");
  const std::size_t channels = x.dim(1);
  if (channels == 3) return color::convert_color(x, model);
  if (channels != 1) throw std::invalid_argument("images must have 1 or 3 channels, got " + std::to_string(channels));
  if (x.max() > 255) throw std::invalid_argument("image values must lie in [0,255]");
  if (model.model == color::ColorModel::rgb) return x;

  const std::size_t batch = x.dim(0), plane = x.dim(2) * x.dim(3);
  std::vector<IntTensor::value_type> rgb(batch * 3 * plane);
  const auto in = x.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < 3; ++c)
      std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(b * plane), plane,
                  rgb.begin() + static_cast<std::ptrdiff_t>((b * 3 + c) * plane));
  return color::convert_color(IntTensor({batch, 3, x.dim(2), x.dim(3)}, std::move(rgb)), model);
}

SpikeTrain bitplane_encode(const IntTensor& x, const color::ColorModelSpec& model) {
  require_image_batch(x, "bitplane_encode");
  require_within(x, model, "bitplane_encode");
  const auto planes = static_cast<std::size_t>(model.n_bit);
  if (x.max() >> model.n_bit) {
    throw std::invalid_argument("bitplane_encode: value " + std::to_string(x.max()) + " needs more than " +
                                std::to_string(model.n_bit) + " bits");
  }

  SpikeTrain out;
  out.kind = EncodeMode::bitplane;
  out.shape = {planes, x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
  out.spikes.reserve(planes * x.numel());
  // Remainder is the plane, quotient carries on to the next one.
  IntTensor rest = x;
  for (std::size_t k = 0; k < planes; ++k) {
    const IntTensor bit = mod(rest, 2);
    for (auto v : bit.data()) out.spikes.push_back(static_cast<std::uint8_t>(v));
    rest = floor_div(rest, 2);
  }
  return out;
}

SpikeTrain rate_encode(const IntTensor& x, const EncoderConfig& cfg) {
  require_image_batch(x, "rate_encode");
  require_within(x, cfg.model, "rate_encode");
  if (cfg.timesteps < 1) throw std::invalid_argument("rate_encode: timesteps must be >= 1");

  SpikeTrain out;
  out.kind = EncodeMode::rate;
  out.shape = {cfg.timesteps, x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
  const std::size_t n = x.numel();
  out.spikes.assign(cfg.timesteps * n, 0);

  const double x_max = cfg.model.x_max;
  const auto in = x.data();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = 0; t < cfg.timesteps; ++t) {
      std::uint8_t* row = out.spikes.data() + t * n;
      for (std::size_t i = begin; i < end; ++i) {
        const double p = in[i] / x_max;
        row[i] = rng::uniform(cfg.seed, t, i) < p ? 1 : 0;
      }
    }
  };

  const std::size_t batch = x.dim(0);
  const std::size_t per_sample = n / batch;
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, batch);
  if (workers == 1) {
    work(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b0 = batch * w / workers, b1 = batch * (w + 1) / workers;
      pool.emplace_back(work, b0 * per_sample, b1 * per_sample);
    }
  }  // joined here
  return out;
}

SpikeTrain concat_time(const SpikeTrain& first, const SpikeTrain& second, EncodeMode kind) {
  if (!std::equal(first.shape.begin() + 1, first.shape.end(), second.shape.begin() + 1, second.shape.end())) {
    throw std::invalid_argument("concat_time: frame shapes differ: " + shape_str(first.shape) + " vs " +
                                shape_str(second.shape));
  }
  SpikeTrain out;
  out.kind = kind;
  out.shape = first.shape;
  out.shape[0] += second.shape[0];
  out.spikes.reserve(first.spikes.size() + second.spikes.size());
  out.spikes.insert(out.spikes.end(), first.spikes.begin(), first.spikes.end());
  out.spikes.insert(out.spikes.end(), second.spikes.begin(), second.spikes.end());
  return out;
}

SpikeTrain combined_encode(const IntTensor& x_raw, const EncoderConfig& cfg) {
  const IntTensor x = prepare_input(x_raw, cfg.model);
  return concat_time(rate_encode(x, cfg), bitplane_encode(x, cfg.model), EncodeMode::combined);
}

SpikeTrain encode(const IntTensor& x_raw, const EncoderConfig& cfg) {
  switch (cfg.mode) {
    case EncodeMode::rate: return rate_encode(prepare_input(x_raw, cfg.model), cfg);
    case EncodeMode::bitplane: return bitplane_encode(prepare_input(x_raw, cfg.model), cfg.model);
    case EncodeMode::combined: return combined_encode(x_raw, cfg);
  }
  throw std::invalid_argument("unknown encode mode");
}

IntTensor reconstruct(const SpikeTrain& planes) {
  const std::size_t n = planes.frame_size();
  std::vector<IntTensor::value_type> out(n, 0);
  for (std::size_t k = 0; k < planes.steps(); ++k) {
    const std::uint8_t* plane = planes.spikes.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += static_cast<IntTensor::value_type>(plane[i]) << k;
  }
  return IntTensor(Shape(planes.shape.begin() + 1, planes.shape.end()), std::move(out));
}

}  // namespace bpsnn::codec
