#include "bpsnn/neuron.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bpsnn::neuron {

void SurrogateSpec::validate() const {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw std::invalid_argument("surrogate alpha must be finite and positive, got " + std::to_string(alpha));
  }
}

SurrogateFamily parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sigmoid") return SurrogateFamily::sigmoid;
  if (lower == "arctan" || lower == "atan") return SurrogateFamily::arctan;
  throw std::invalid_argument("unknown surrogate family '" + std::string(name) + "' (expected sigmoid or arctan)");
}

std::string_view family_name(SurrogateFamily family) {
  return family == SurrogateFamily::sigmoid ? "sigmoid" : "arctan";
}

Tensor heaviside(const Tensor& theta, double t) {
  std::vector<double> out(theta.numel());
  const auto x = theta.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - t >= 0.0 ? 1.0 : 0.0;
  return Tensor(theta.shape(), std::move(out));
}

double surrogate_grad(double x, const SurrogateSpec& spec) {
  switch (spec.family) {
    case SurrogateFamily::sigmoid: {
      // e^z / (e^z + 1)^2 written with e^-|z| so large |z| cannot overflow.
      const double e = std::exp(-std::abs(spec.alpha * x));
      return spec.alpha * e / ((1.0 + e) * (1.0 + e));
    }
    case SurrogateFamily::arctan: {
      const double z = std::numbers::pi / 2.0 * spec.alpha * x;
      return spec.alpha / (2.0 * (1.0 + z * z));
    }
  }
  return 0.0;
}

Tensor surrogate_grad(const Tensor& theta, double t, const SurrogateSpec& spec) {
  std::vector<double> out(theta.numel());
  const auto x = theta.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = surrogate_grad(x[i] - t, spec);
  return Tensor(theta.shape(), std::move(out));
}

namespace {

double forward_value(double x, const SurrogateSpec& spec, SpikeForward forward) {
  if (forward == SpikeForward::heaviside) return x >= 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-spec.alpha * x));
}

}  // namespace

Tensor spike(const Tensor& theta, double t, const SurrogateSpec& spec, SpikeForward forward) {
  spec.validate();
  std::vector<double> out(theta.numel());
  const auto x = theta.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward_value(x[i] - t, spec, forward);

  Tape* tape = detail::recording_tape({&theta});
  Tensor result = detail::make_result(theta.shape(), std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({theta.node()}, {rn}, [theta, rn, t, spec] {
      auto& g = theta.node()->ensure_grad();
      const auto x = theta.data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += rn->grad[i] * surrogate_grad(x[i] - t, spec);
    });
  }
  return result;
}

IfStepResult if_step(const IfNeuronState& state, const Tensor& input, const SurrogateSpec& spec,
                     SpikeForward forward) {
  spec.validate();
  if (!(state.v_reset < state.v_threshold)) throw std::invalid_argument("v_reset must be below v_threshold");
  if (state.v.defined() && state.v.shape() != input.shape()) {
    throw std::invalid_argument("if_step: input " + shape_str(input.shape()) + " does not match state " +
                                shape_str(state.v.shape()));
  }

  const std::size_t n = input.numel();
  const auto in = input.data();
  std::vector<double> v(n), s(n), v_next(n);
  const double th = state.v_threshold, vr = state.v_reset;
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = state.v.defined() ? state.v[i] : vr;
    v[i] = prev + in[i];
    s[i] = forward_value(v[i] - th, spec, forward);
    v_next[i] = v[i] * (1.0 - s[i]) + vr * s[i];
  }

  Tape* tape = detail::recording_tape({&state.v, &input});
  Tensor spikes = detail::make_result(input.shape(), std::move(s), tape != nullptr);
  Tensor next = detail::make_result(input.shape(), std::move(v_next), tape != nullptr);
  if (tape) {
    std::vector<detail::NodePtr> inputs{input.node()};
    if (state.v.defined()) inputs.push_back(state.v.node());
    auto sn = spikes.node();
    auto vn = next.node();
    tape->record(std::move(inputs), {sn, vn},
                 [v_prev = state.v, input, sn, vn, membrane = std::move(v), th, vr, spec] {
                   const std::size_t n = membrane.size();
                   std::vector<double> dv(n, 0.0);
                   const auto& s = sn->data;
                   for (std::size_t i = 0; i < n; ++i) {
                     const double sg = surrogate_grad(membrane[i] - th, spec);
                     double d = 0.0;
                     if (!sn->grad.empty()) d += sn->grad[i] * sg;
                     // v_next = v (1 - s) + v_reset s
                     if (!vn->grad.empty()) d += vn->grad[i] * ((1.0 - s[i]) + (vr - membrane[i]) * sg);
                     dv[i] = d;
                   }
                   if (input.requires_grad()) {
                     auto& g = input.node()->ensure_grad();
                     for (std::size_t i = 0; i < n; ++i) g[i] += dv[i];
                   }
                   if (v_prev.defined() && v_prev.requires_grad()) {
                     auto& g = v_prev.node()->ensure_grad();
                     for (std::size_t i = 0; i < n; ++i) g[i] += dv[i];
                   }
                 });
  }

  IfNeuronState updated = state;
  updated.v = next;
  return {spikes, updated};
}

bool IfNeuronState::is_reset() const noexcept {
  if (!v.defined()) return true;
  if (v.requires_grad()) return false;
  const auto values = v.data();
  return std::all_of(values.begin(), values.end(), [this](double x) { return x == v_reset; });
}

IfNeuronState reset(const IfNeuronState& state) {
  IfNeuronState out = state;
  if (state.v.defined()) out.v = Tensor::full(state.v.shape(), state.v_reset);
  return out;
}

}  // namespace bpsnn::neuron
