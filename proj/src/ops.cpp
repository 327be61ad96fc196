#include "bpsnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "bpsnn/kernels.hpp"

namespace bpsnn {
namespace {

using detail::make_result;
using detail::recording_tape;

// Adds `values` (already scaled) into t's gradient when it wants one.
template <class Fn>
void add_grad(const Tensor& t, Fn&& per_element) {
  if (!t.requires_grad()) return;
  auto& g = t.node()->ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += per_element(i);
}

std::span<const double> out_grad(const detail::NodePtr& node) { return node->grad; }

const char* op_name(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "add";
    case BinaryOp::sub: return "sub";
    case BinaryOp::mul: return "mul";
    case BinaryOp::div: return "div";
    case BinaryOp::floor_div: return "floor_div";
    case BinaryOp::mod: return "mod";
  }
  return "?";
}

double apply(BinaryOp op, double x, double y) {
  switch (op) {
    case BinaryOp::add: return x + y;
    case BinaryOp::sub: return x - y;
    case BinaryOp::mul: return x * y;
    case BinaryOp::div: return x / y;
    case BinaryOp::floor_div: return std::floor(x / y);
    case BinaryOp::mod: return x - y * std::floor(x / y);
  }
  return 0.0;
}

bool divides(BinaryOp op) { return op == BinaryOp::div || op == BinaryOp::floor_div || op == BinaryOp::mod; }
bool differentiable(BinaryOp op) { return op != BinaryOp::floor_div && op != BinaryOp::mod; }

void require_defined(const Tensor& t, const char* what) {
  if (!t.defined()) throw std::invalid_argument(std::string(what) + ": undefined tensor");
}

}  // namespace

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b) {
  require_defined(a, op_name(op));
  require_defined(b, op_name(op));
  if (b.numel() == 1 && a.shape() != b.shape()) {
    if (b.requires_grad() && differentiable(op)) {
      throw std::invalid_argument(std::string(op_name(op)) + ": scalar operand must not require grad; use a same-shape tensor");
    }
    return elementwise(op, a, b[0]);
  }
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op_name(op)) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
  const auto x = a.data();
  const auto y = b.data();
  if (divides(op) && std::find(y.begin(), y.end(), 0.0) != y.end()) {
    throw std::domain_error(std::string(op_name(op)) + ": division by zero");
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, x[i], y[i]);

  Tape* tape = differentiable(op) ? recording_tape({&a, &b}) : nullptr;
  Tensor result = make_result(a.shape(), std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({a.node(), b.node()}, {rn}, [op, a, b, rn] {
      const auto g = out_grad(rn);
      const auto x = a.data();
      const auto y = b.data();
      switch (op) {
        case BinaryOp::add:
          add_grad(a, [&](std::size_t i) { return g[i]; });
          add_grad(b, [&](std::size_t i) { return g[i]; });
          break;
        case BinaryOp::sub:
          add_grad(a, [&](std::size_t i) { return g[i]; });
          add_grad(b, [&](std::size_t i) { return -g[i]; });
          break;
        case BinaryOp::mul:
          add_grad(a, [&](std::size_t i) { return g[i] * y[i]; });
          add_grad(b, [&](std::size_t i) { return g[i] * x[i]; });
          break;
        case BinaryOp::div:
          add_grad(a, [&](std::size_t i) { return g[i] / y[i]; });
          add_grad(b, [&](std::size_t i) { return -g[i] * x[i] / (y[i] * y[i]); });
          break;
        default:
          break;
      }
    });
  }
  return result;
}

Tensor elementwise(BinaryOp op, const Tensor& a, double b) {
  require_defined(a, op_name(op));
  if (divides(op) && b == 0.0) throw std::domain_error(std::string(op_name(op)) + ": division by zero");
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, x[i], b);

  Tape* tape = differentiable(op) ? recording_tape({&a}) : nullptr;
  Tensor result = make_result(a.shape(), std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    const double scale = op == BinaryOp::mul ? b : op == BinaryOp::div ? 1.0 / b : 1.0;
    tape->record({a.node()}, {rn}, [a, rn, scale] {
      const auto g = out_grad(rn);
      add_grad(a, [&](std::size_t i) { return g[i] * scale; });
    });
  }
  return result;
}

Tensor floor(const Tensor& a) {
  require_defined(a, "floor");
  std::vector<double> out(a.numel());
  const auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::floor(x[i]);
  return Tensor(a.shape(), std::move(out));
}

Tensor sigmoid(const Tensor& a) {
  require_defined(a, "sigmoid");
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
  Tape* tape = recording_tape({&a});
  Tensor result = make_result(a.shape(), std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({a.node()}, {rn}, [a, rn] {
      const auto g = out_grad(rn);
      const auto& s = rn->data;
      add_grad(a, [&](std::size_t i) { return g[i] * s[i] * (1.0 - s[i]); });
    });
  }
  return result;
}

Tensor exp(const Tensor& a) {
  require_defined(a, "exp");
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x[i]);
  Tape* tape = recording_tape({&a});
  Tensor result = make_result(a.shape(), std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({a.node()}, {rn}, [a, rn] {
      const auto g = out_grad(rn);
      const auto& e = rn->data;
      add_grad(a, [&](std::size_t i) { return g[i] * e[i]; });
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double v : a.data()) total += v;
  Tape* tape = recording_tape({&a});
  Tensor result = make_result({1}, {total}, tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({a.node()}, {rn}, [a, rn] {
      const double g = rn->grad[0];
      add_grad(a, [&](std::size_t) { return g; });
    });
  }
  return result;
}

Tensor mean(const Tensor& a) { return div(sum(a), static_cast<double>(a.numel())); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  kernels::active().gemm_nn(m, n, k, a.data().data(), b.data().data(), out.data());

  Tape* tape = recording_tape({&a, &b});
  Tensor result = make_result({m, n}, std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({a.node(), b.node()}, {rn}, [a, b, rn, m, n, k] {
      const auto& kt = kernels::active();
      const double* g = rn->grad.data();
      if (a.requires_grad()) kt.gemm_nt(m, k, n, g, b.data().data(), a.node()->ensure_grad().data());
      if (b.requires_grad()) kt.gemm_tn(k, n, m, a.data().data(), g, b.node()->ensure_grad().data());
    });
  }
  return result;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_defined(x, "linear");
  require_defined(weight, "linear");
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(1)) {
    throw std::invalid_argument("linear: incompatible shapes " + shape_str(x.shape()) + " and weight " +
                                shape_str(weight.shape()));
  }
  const std::size_t batch = x.dim(0), in = x.dim(1), out_features = weight.dim(0);
  if (bias.defined() && bias.numel() != out_features) {
    throw std::invalid_argument("linear: bias length " + std::to_string(bias.numel()) + " != " +
                                std::to_string(out_features));
  }
  std::vector<double> out(batch * out_features, 0.0);
  if (bias.defined()) {
    for (std::size_t r = 0; r < batch; ++r) std::copy(bias.data().begin(), bias.data().end(), out.begin() + r * out_features);
  }
  kernels::active().gemm_nt(batch, out_features, in, x.data().data(), weight.data().data(), out.data());

  Tape* tape = recording_tape({&x, &weight, &bias});
  Tensor result = make_result({batch, out_features}, std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    std::vector<detail::NodePtr> inputs{x.node(), weight.node()};
    if (bias.defined()) inputs.push_back(bias.node());
    tape->record(std::move(inputs), {rn}, [x, weight, bias, rn, batch, in, out_features] {
      const auto& kt = kernels::active();
      const double* g = rn->grad.data();
      if (x.requires_grad()) kt.gemm_nn(batch, in, out_features, g, weight.data().data(), x.node()->ensure_grad().data());
      if (weight.requires_grad()) kt.gemm_tn(out_features, in, batch, g, x.data().data(), weight.node()->ensure_grad().data());
      if (bias.defined() && bias.requires_grad()) {
        auto& gb = bias.node()->ensure_grad();
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t o = 0; o < out_features; ++o) gb[o] += g[r * out_features + o];
      }
    });
  }
  return result;
}

namespace {

struct ConvGeometry {
  std::size_t batch, cin, h, w, cout, kh, kw, stride, pad, ho, wo;
  std::size_t patch() const { return cin * kh * kw; }
  std::size_t positions() const { return ho * wo; }
};

// col[(c*kh + i)*kw + j][oy*wo + ox] = x[c][oy*s + i - p][ox*s + j - p] (0 outside)
// Output columns [lo, hi) read inside the input row for kernel column j.
std::pair<std::size_t, std::size_t> valid_columns(const ConvGeometry& g, std::size_t j) {
  std::size_t lo = 0;
  while (lo < g.wo && lo * g.stride + j < g.pad) ++lo;
  std::size_t hi = lo;
  while (hi < g.wo && hi * g.stride + j < g.pad + g.w) ++hi;
  return {lo, hi};
}

void im2col(const ConvGeometry& g, const double* x, double* col) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* row = col + ((c * g.kh + i) * g.kw + j) * g.positions();
        const auto [lo, hi] = valid_columns(g, j);
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + oy * g.wo;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(dst, dst + g.wo, 0.0);
            continue;
          }
          const double* src = x + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          std::fill(dst, dst + lo, 0.0);
          if (g.stride == 1) {
            if (hi > lo) std::copy(src + lo + j - g.pad, src + hi + j - g.pad, dst + lo);
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) dst[ox] = src[ox * g.stride + j - g.pad];
          }
          std::fill(dst + hi, dst + g.wo, 0.0);
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* col, double* x) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* row = col + ((c * g.kh + i) * g.kw + j) * g.positions();
        const auto [lo, hi] = valid_columns(g, j);
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = x + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          const double* src = row + oy * g.wo;
          for (std::size_t ox = lo; ox < hi; ++ox) dst[ox * g.stride + j - g.pad] += src[ox];
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dParams params) {
  require_defined(x, "conv2d");
  require_defined(weight, "conv2d");
  if (x.rank() != 4 || weight.rank() != 4 || x.dim(1) != weight.dim(1)) {
    throw std::invalid_argument("conv2d: incompatible shapes " + shape_str(x.shape()) + " and weight " +
                                shape_str(weight.shape()));
  }
  if (params.stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), weight.dim(3),
                 params.stride, params.padding, 0, 0};
  if (g.kh > g.h + 2 * g.pad || g.kw > g.w + 2 * g.pad) {
    throw std::invalid_argument("conv2d: kernel " + shape_str(weight.shape()) + " larger than padded input " +
                                shape_str(x.shape()));
  }
  if (bias.defined() && bias.numel() != g.cout) throw std::invalid_argument("conv2d: bias length mismatch");
  g.ho = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
  g.wo = (g.w + 2 * g.pad - g.kw) / g.stride + 1;

  const std::size_t in_plane = g.cin * g.h * g.w;
  const std::size_t out_plane = g.cout * g.positions();
  std::vector<double> out(g.batch * out_plane, 0.0);
  std::vector<double> col(g.patch() * g.positions());
  const auto& kt = kernels::active();
  for (std::size_t b = 0; b < g.batch; ++b) {
    double* ob = out.data() + b * out_plane;
    if (bias.defined()) {
      for (std::size_t o = 0; o < g.cout; ++o) std::fill(ob + o * g.positions(), ob + (o + 1) * g.positions(), bias[o]);
    }
    im2col(g, x.data().data() + b * in_plane, col.data());
    kt.gemm_nn(g.cout, g.positions(), g.patch(), weight.data().data(), col.data(), ob);
  }

  Tape* tape = recording_tape({&x, &weight, &bias});
  Tensor result = make_result({g.batch, g.cout, g.ho, g.wo}, std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    std::vector<detail::NodePtr> inputs{x.node(), weight.node()};
    if (bias.defined()) inputs.push_back(bias.node());
    tape->record(std::move(inputs), {rn}, [x, weight, bias, rn, g, in_plane, out_plane] {
      const auto& kt = kernels::active();
      std::vector<double> col(g.patch() * g.positions());
      std::vector<double> dcol;
      if (x.requires_grad()) dcol.resize(col.size());
      for (std::size_t b = 0; b < g.batch; ++b) {
        const double* gb = rn->grad.data() + b * out_plane;
        if (weight.requires_grad()) {
          im2col(g, x.data().data() + b * in_plane, col.data());
          kt.gemm_nt(g.cout, g.patch(), g.positions(), gb, col.data(), weight.node()->ensure_grad().data());
        }
        if (x.requires_grad()) {
          std::fill(dcol.begin(), dcol.end(), 0.0);
          kt.gemm_tn(g.patch(), g.positions(), g.cout, weight.data().data(), gb, dcol.data());
          col2im_add(g, dcol.data(), x.node()->ensure_grad().data() + b * in_plane);
        }
        if (bias.defined() && bias.requires_grad()) {
          auto& gbias = bias.node()->ensure_grad();
          for (std::size_t o = 0; o < g.cout; ++o) {
            const double* go = gb + o * g.positions();
            gbias[o] += std::accumulate(go, go + g.positions(), 0.0);
          }
        }
      }
    });
  }
  return result;
}

Tensor avg_pool2d(const Tensor& x, std::size_t k) {
  require_defined(x, "avg_pool2d");
  if (x.rank() != 4 || k == 0 || x.dim(2) % k != 0 || x.dim(3) % k != 0) {
    throw std::invalid_argument("avg_pool2d: spatial dims of " + shape_str(x.shape()) + " not divisible by " +
                                std::to_string(k));
  }
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = h / k, wo = w / k;
  const double inv = 1.0 / static_cast<double>(k * k);
  std::vector<double> out(planes * ho * wo, 0.0);
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) out[(p * ho + y / k) * wo + xx / k] += in[(p * h + y) * w + xx] * inv;

  Tape* tape = recording_tape({&x});
  Tensor result = make_result({x.dim(0), x.dim(1), ho, wo}, std::move(out), tape != nullptr);
  if (tape) {
    auto rn = result.node();
    tape->record({x.node()}, {rn}, [x, rn, planes, h, w, ho, wo, k, inv] {
      auto& gx = x.node()->ensure_grad();
      const auto& g = rn->grad;
      for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t xx = 0; xx < w; ++xx) gx[(p * h + y) * w + xx] += g[(p * ho + y / k) * wo + xx / k] * inv;
    });
  }
  return result;
}

}  // namespace bpsnn
