#pragma once

// RGB -> integer color-model conversions.
//
// Every model is quantized to non-negative integers so its channels can be
// sliced into bit planes. Ranges per model:
//
//   rgb    identity                              (255, 255, 255)
//   cmy    round(100 * (1 - c/255))              (100, 100, 100)
//   ycbcr  full-range BT.601                     (255, 255, 255)
//   hsl    H degrees, S and L in percent         (359, 100, 100)
//   hsv    H degrees, S and V in percent         (359, 100, 100)
//   xyz    sRGB-linearized, D65, white -> 255    (255, 255, 255)
//   lab    L in [0,100], a and b offset by +128  (100, 255, 255)
//
// x_max is the largest channel maximum; n_bit = ceil(log2(x_max)).
// Rounding is half away from zero, followed by clamping.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "bpsnn/int_tensor.hpp"

namespace bpsnn::color {

enum class ColorModel { rgb, cmy, ycbcr, hsl, hsv, xyz, lab };

struct ColorModelSpec {
  ColorModel model = ColorModel::rgb;
  std::array<int, 3> channel_max{255, 255, 255};
  int x_max = 255;
  int n_bit = 8;

  friend bool operator==(const ColorModelSpec&, const ColorModelSpec&) = default;
};

// Smallest n with 2^n >= x_max. Requires x_max >= 2.
int bits_for(int x_max);

// Spec with explicit ranges; rejects x_max < 2.
ColorModelSpec make_spec(ColorModel model, std::array<int, 3> channel_max);

ColorModelSpec spec_for(ColorModel model);
// Case-insensitive: rgb, cmy, ycbcr, hsl, hsv, xyz, lab.
ColorModelSpec spec_for(std::string_view name);

ColorModel parse_model(std::string_view name);
std::string_view model_name(ColorModel model);

using Pixel = std::array<int, 3>;

// Single RGB pixel in [0,255]^3 to the model's integer channels.
Pixel convert_pixel(const Pixel& rgb, ColorModel model);

// x: (B,3,H,W) RGB in [0,255]. Output has the same shape.
IntTensor convert_color(const IntTensor& x, const ColorModelSpec& spec);

}  // namespace bpsnn::color
