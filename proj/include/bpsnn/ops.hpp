#pragma once

// Tensor operations. Shapes must match exactly, or one side is a scalar;
// there is no other broadcasting.

#include <cstddef>

#include "bpsnn/tensor.hpp"

namespace bpsnn {

enum class BinaryOp { add, sub, mul, div, floor_div, mod };

Tensor elementwise(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor elementwise(BinaryOp op, const Tensor& a, double b);

inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::mul, a, b); }
inline Tensor div(const Tensor& a, const Tensor& b) { return elementwise(BinaryOp::div, a, b); }
inline Tensor add(const Tensor& a, double b) { return elementwise(BinaryOp::add, a, b); }
inline Tensor sub(const Tensor& a, double b) { return elementwise(BinaryOp::sub, a, b); }
inline Tensor mul(const Tensor& a, double b) { return elementwise(BinaryOp::mul, a, b); }
inline Tensor div(const Tensor& a, double b) { return elementwise(BinaryOp::div, a, b); }
// Piecewise constant: results carry no gradient.
inline Tensor floor_div(const Tensor& a, double b) { return elementwise(BinaryOp::floor_div, a, b); }
inline Tensor mod(const Tensor& a, double b) { return elementwise(BinaryOp::mod, a, b); }

Tensor floor(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// (m,k) x (k,n)
Tensor matmul(const Tensor& a, const Tensor& b);

// x (B,I), weight (O,I), bias (O) or undefined -> (B,O)
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dParams {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// Cross-correlation. x (B,Cin,H,W), weight (Cout,Cin,kh,kw), bias (Cout) or
// undefined. Output spatial size: (H + 2p - kh) / stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dParams params = {});
inline Tensor conv2d(const Tensor& x, const Tensor& weight, Conv2dParams params = {}) {
  return conv2d(x, weight, Tensor{}, params);
}

// Non-overlapping k x k mean pool; H and W must be divisible by k.
Tensor avg_pool2d(const Tensor& x, std::size_t k);

}  // namespace bpsnn
