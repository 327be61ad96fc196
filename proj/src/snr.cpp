#include "bpsnn/snr.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bpsnn/train.hpp"

namespace bpsnn::snr {

GradSnrReport grad_snr(std::span<const std::vector<double>> per_sample_grads) {
  const std::size_t n = per_sample_grads.size();
  if (n < 2) throw std::invalid_argument("grad_snr needs at least 2 samples, got " + std::to_string(n));
  const std::size_t len = per_sample_grads[0].size();
  for (const auto& g : per_sample_grads) {
    if (g.size() != len) throw std::invalid_argument("grad_snr: gradient lengths differ");
  }

  std::vector<double> mean(len, 0.0);
  for (const auto& g : per_sample_grads) {
    for (std::size_t i = 0; i < len; ++i) mean[i] += g[i];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  GradSnrReport report;
  report.sample_count = n;
  for (double m : mean) report.sig += m * m;
  for (const auto& g : per_sample_grads) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double d = g[i] - mean[i];
      d2 += d * d;
    }
    report.noi += d2;
  }
  report.noi /= static_cast<double>(n);
  report.snr = report.noi > 0.0 ? report.sig / report.noi : std::numeric_limits<double>::infinity();
  return report;
}

std::vector<std::vector<double>> collect_per_sample_grads(net::SpikingNet& net, const codec::SpikeTrain& batch,
                                                          std::span<const int> labels) {
  const std::size_t b = batch.shape.at(1);
  if (b < 2) throw std::invalid_argument("collect_per_sample_grads needs a batch of at least 2");
  if (labels.size() != b) throw std::invalid_argument("collect_per_sample_grads: label count differs from batch");

  std::vector<std::vector<double>> grads;
  grads.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    net.zero_grad();
    net.reset();
    Tape tape;
    {
      TapeScope scope(tape);
      const Tensor logits = net.forward(batch.sample(i));
      const Tensor loss = train::softmax_cross_entropy(logits, labels.subspan(i, 1));
      tape.backward(loss);
    }
    grads.push_back(net.flat_grad());
  }
  net.zero_grad();
  net.reset();
  return grads;
}

double theoretical_magnitude(double phi, double theta_prime_1, double theta_prime_0, int k, std::size_t n,
                             std::size_t t_prime) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must be in [0, 1]");
  if (k < 1 || n < 1 || t_prime < 1) throw std::invalid_argument("k, n and t' must be at least 1");
  if (!std::isfinite(theta_prime_1) || !std::isfinite(theta_prime_0)) {
    throw std::invalid_argument("surrogate derivatives must be finite");
  }
  const double alpha = phi * std::pow(theta_prime_1, 2 * k) + (1.0 - phi) * std::pow(theta_prime_0, 2 * k);
  return std::sqrt(static_cast<double>(n) * static_cast<double>(t_prime) * alpha);
}

}  // namespace bpsnn::snr
