#pragma once

// Gradient signal-to-noise ratio over per-sample gradients:
//   Sig = ||mean(delta)||^2,  Noi = mean ||delta - mean(delta)||^2,  SNR = Sig / Noi.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bpsnn/codec.hpp"
#include "bpsnn/network.hpp"

namespace bpsnn::snr {

struct GradSnrReport {
  std::size_t epoch = 0;
  double sig = 0.0;
  double noi = 0.0;
  double snr = 0.0;  // +inf when noi == 0
  std::size_t sample_count = 0;
};

GradSnrReport grad_snr(std::span<const std::vector<double>> per_sample_grads);

// One forward/backward per sample with fresh neuron states; returns the
// flattened whole-model gradient of each sample's own loss. Parameter
// gradients are zeroed before returning.
std::vector<std::vector<double>> collect_per_sample_grads(net::SpikingNet& net, const codec::SpikeTrain& batch,
                                                          std::span<const int> labels);

// sqrt(N * T' * alpha), alpha = phi * tp1^(2k) + (1 - phi) * tp0^(2k), where
// tp1 = surrogate'(1 - V_th) and tp0 = surrogate'(0 - V_th).
double theoretical_magnitude(double phi, double theta_prime_1, double theta_prime_0, int k, std::size_t n,
                             std::size_t t_prime);

}  // namespace bpsnn::snr
