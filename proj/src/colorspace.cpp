#include "bpsnn/colorspace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace bpsnn::color {

int bits_for(int x_max) {
  if (x_max < 2) throw std::invalid_argument("x_max must be at least 2, got " + std::to_string(x_max));
  int n = 0;
  while ((std::int64_t{1} << n) < x_max) ++n;
  return n;
}

ColorModelSpec make_spec(ColorModel model, std::array<int, 3> channel_max) {
  for (int m : channel_max) {
    if (m < 1) throw std::invalid_argument("channel maxima must be positive");
  }
  ColorModelSpec spec;
  spec.model = model;
  spec.channel_max = channel_max;
  spec.x_max = *std::max_element(channel_max.begin(), channel_max.end());
  spec.n_bit = bits_for(spec.x_max);
  return spec;
}

ColorModelSpec spec_for(ColorModel model) {
  switch (model) {
    case ColorModel::rgb:
    case ColorModel::ycbcr:
    case ColorModel::xyz:
      return make_spec(model, {255, 255, 255});
    case ColorModel::cmy:
      return make_spec(model, {100, 100, 100});
    case ColorModel::hsl:
    case ColorModel::hsv:
      return make_spec(model, {359, 100, 100});
    case ColorModel::lab:
      return make_spec(model, {100, 255, 255});
  }
  throw std::invalid_argument("unsupported color model");
}

ColorModelSpec spec_for(std::string_view name) { return spec_for(parse_model(name)); }

ColorModel parse_model(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "rgb") return ColorModel::rgb;
  if (lower == "cmy") return ColorModel::cmy;
  if (lower == "ycbcr") return ColorModel::ycbcr;
  if (lower == "hsl") return ColorModel::hsl;
  if (lower == "hsv") return ColorModel::hsv;
  if (lower == "xyz") return ColorModel::xyz;
  if (lower == "lab") return ColorModel::lab;
  throw std::invalid_argument("unsupported color model '" + std::string(name) +
                              "' (expected rgb, cmy, ycbcr, hsl, hsv, xyz or lab)");
}

std::string_view model_name(ColorModel model) {
  switch (model) {
    case ColorModel::rgb: return "rgb";
    case ColorModel::cmy: return "cmy";
    case ColorModel::ycbcr: return "ycbcr";
    case ColorModel::hsl: return "hsl";
    case ColorModel::hsv: return "hsv";
    case ColorModel::xyz: return "xyz";
    case ColorModel::lab: return "lab";
  }
  return "?";
}

namespace {

int quantize(double v, int hi) {
  const double r = std::round(v);  // half away from zero
  return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(hi)));
}

// Hue in degrees [0, 360) from integer channels; 0 for achromatic pixels.
double hue_degrees(int r, int g, int b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double d = mx - mn;
  if (d == 0.0) return 0.0;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  return h < 0.0 ? h + 360.0 : h;
}

int hue_int(int r, int g, int b) { return static_cast<int>(std::round(hue_degrees(r, g, b))) % 360; }

double srgb_to_linear(int c) {
  const double v = c / 255.0;
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// sRGB (D65) primaries.
constexpr double kM[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}};

// White point: the image of linear (1,1,1).
constexpr std::array<double, 3> kWhite{kM[0][0] + kM[0][1] + kM[0][2], kM[1][0] + kM[1][1] + kM[1][2],
                                       kM[2][0] + kM[2][1] + kM[2][2]};

std::array<double, 3> to_xyz(int r, int g, int b) {
  const double lr = srgb_to_linear(r), lg = srgb_to_linear(g), lb = srgb_to_linear(b);
  std::array<double, 3> xyz{};
  for (int i = 0; i < 3; ++i) xyz[i] = kM[i][0] * lr + kM[i][1] * lg + kM[i][2] * lb;
  return xyz;
}

double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace

Pixel convert_pixel(const Pixel& rgb, ColorModel model) {
  const auto [r, g, b] = rgb;
  for (int c : rgb) {
    if (c < 0 || c > 255) throw std::invalid_argument("RGB input out of range [0,255]: " + std::to_string(c));
  }
  switch (model) {
    case ColorModel::rgb:
      return rgb;
    case ColorModel::cmy:
      return {quantize(100.0 * (1.0 - r / 255.0), 100), quantize(100.0 * (1.0 - g / 255.0), 100),
              quantize(100.0 * (1.0 - b / 255.0), 100)};
    case ColorModel::ycbcr: {
      const double y = 0.299 * r + 0.587 * g + 0.114 * b;
      const double cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
      const double cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
      return {quantize(y, 255), quantize(cb, 255), quantize(cr, 255)};
    }
    case ColorModel::hsv: {
      const int mx = std::max({r, g, b});
      const int mn = std::min({r, g, b});
      const double s = mx == 0 ? 0.0 : static_cast<double>(mx - mn) / mx;
      return {hue_int(r, g, b), quantize(100.0 * s, 100), quantize(100.0 * mx / 255.0, 100)};
    }
    case ColorModel::hsl: {
      const int mx = std::max({r, g, b});
      const int mn = std::min({r, g, b});
      const double l = (mx + mn) / 510.0;
      const double d = (mx - mn) / 255.0;
      const double denom = 1.0 - std::abs(2.0 * l - 1.0);
      const double s = (mx == mn || denom <= 0.0) ? 0.0 : d / denom;
      return {hue_int(r, g, b), quantize(100.0 * s, 100), quantize(100.0 * l, 100)};
    }
    case ColorModel::xyz: {
      const auto xyz = to_xyz(r, g, b);
      return {quantize(255.0 * xyz[0] / kWhite[0], 255), quantize(255.0 * xyz[1] / kWhite[1], 255),
              quantize(255.0 * xyz[2] / kWhite[2], 255)};
    }
    case ColorModel::lab: {
      const auto xyz = to_xyz(r, g, b);
      const double fx = lab_f(xyz[0] / kWhite[0]);
      const double fy = lab_f(xyz[1] / kWhite[1]);
      const double fz = lab_f(xyz[2] / kWhite[2]);
      const double l = 116.0 * fy - 16.0;
      const double a = 500.0 * (fx - fy);
      const double bb = 200.0 * (fy - fz);
      return {quantize(l, 100), quantize(a + 128.0, 255), quantize(bb + 128.0, 255)};
    }
  }
  throw std::invalid_argument("unsupported color model");
}

IntTensor convert_color(const IntTensor& x, const ColorModelSpec& spec) {
  if (x.rank() != 4 || x.dim(1) != 3) {
    throw std::invalid_argument("convert_color expects (B,3,H,W), got " + shape_str(x.shape()));
  }
  if (spec.model == ColorModel::rgb) {
    if (x.max() > 255) throw std::invalid_argument("RGB input out of range [0,255]");
    return x;
  }
  const std::size_t batch = x.dim(0), plane = x.dim(2) * x.dim(3);
  std::vector<IntTensor::value_type> out(x.numel());
  const auto in = x.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * 3 * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      const Pixel rgb{in[base + p], in[base + plane + p], in[base + 2 * plane + p]};
      const Pixel c = convert_pixel(rgb, spec.model);
      for (std::size_t ch = 0; ch < 3; ++ch) out[base + ch * plane + p] = std::min(c[ch], spec.channel_max[ch]);
    }
  }
  return IntTensor(x.shape(), std::move(out));
}

}  // namespace bpsnn::color
