#pragma once

// Non-leaky integrate-and-fire neurons with surrogate-gradient spikes.
//
// Discretized with C = 1 and dt = 1:  v[t] = v[t-1] + I[t];
// s[t] = H(v[t] - V_th);  fired neurons are hard-reset to v_reset.

#include <string_view>

#include "bpsnn/tensor.hpp"

namespace bpsnn::neuron {

enum class SurrogateFamily { sigmoid, arctan };

struct SurrogateSpec {
  SurrogateFamily family = SurrogateFamily::arctan;
  double alpha = 2.0;

  void validate() const;
};

SurrogateFamily parse_family(std::string_view name);
std::string_view family_name(SurrogateFamily family);

// Forward used by the spike function. `smooth_sigmoid` replaces the step by
// sigmoid(alpha * x), which makes the network differentiable end to end and
// lets finite differences check the backward plumbing.
enum class SpikeForward { heaviside, smooth_sigmoid };

// 1 where theta - t >= 0, else 0. Not differentiable; see spike().
Tensor heaviside(const Tensor& theta, double t);

// Surrogate derivative at x = theta - t.
//   sigmoid: alpha * e^(alpha x) / (e^(alpha x) + 1)^2
//   arctan:  alpha / (2 (1 + (pi/2 * alpha * x)^2))
double surrogate_grad(double x, const SurrogateSpec& spec);
Tensor surrogate_grad(const Tensor& theta, double t, const SurrogateSpec& spec);

// Heaviside forward with the surrogate as its backward rule.
Tensor spike(const Tensor& theta, double t, const SurrogateSpec& spec,
             SpikeForward forward = SpikeForward::heaviside);

struct IfNeuronState {
  // Undefined means "v_reset everywhere, shape not yet known".
  Tensor v;
  double v_threshold = 1.0;
  double v_reset = 0.0;

  // True when no step has been taken since the last reset.
  bool is_reset() const noexcept;
};

struct IfStepResult {
  Tensor spikes;
  IfNeuronState state;
};

// One integration step, recorded on the active tape as a single fused op.
IfStepResult if_step(const IfNeuronState& state, const Tensor& input, const SurrogateSpec& spec,
                     SpikeForward forward = SpikeForward::heaviside);

IfNeuronState reset(const IfNeuronState& state);

}  // namespace bpsnn::neuron
