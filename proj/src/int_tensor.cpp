#include "bpsnn/int_tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bpsnn {

IntTensor::IntTensor(Shape shape, std::vector<value_type> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("int tensor dimensions must be positive: " + shape_str(shape_));
  }
  if (shape_numel(shape_) != data_.size()) {
    throw std::invalid_argument("int tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                                shape_str(shape_));
  }
  if (std::any_of(data_.begin(), data_.end(), [](value_type v) { return v < 0; })) {
    throw std::invalid_argument("int tensor elements must be non-negative");
  }
}

IntTensor IntTensor::zeros(Shape shape) {
  const std::size_t n = shape_numel(shape);
  return IntTensor(std::move(shape), std::vector<value_type>(n, 0));
}

IntTensor::value_type IntTensor::max() const {
  if (data_.empty()) throw std::logic_error("max of an empty int tensor");
  return *std::max_element(data_.begin(), data_.end());
}

Tensor IntTensor::to_real() const { return Tensor(shape_, std::vector<double>(data_.begin(), data_.end())); }

namespace {

using V = IntTensor::value_type;

V apply(BinaryOp op, V x, V y) {
  switch (op) {
    case BinaryOp::add: return x + y;
    case BinaryOp::sub:
      if (y > x) throw std::domain_error("int sub would produce a negative element");
      return x - y;
    case BinaryOp::mul: return x * y;
    case BinaryOp::div:
    case BinaryOp::floor_div:
      if (y == 0) throw std::domain_error("int floor_div: division by zero");
      return x / y;
    case BinaryOp::mod:
      if (y == 0) throw std::domain_error("int mod: division by zero");
      return x % y;
  }
  return 0;
}

}  // namespace

IntTensor elementwise(BinaryOp op, const IntTensor& a, const IntTensor& b) {
  if (a.shape() != b.shape()) {
    if (b.numel() == 1) return elementwise(op, a, b[0]);
    throw std::invalid_argument("int elementwise: shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
  std::vector<V> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, a[i], b[i]);
  return IntTensor(a.shape(), std::move(out));
}

IntTensor elementwise(BinaryOp op, const IntTensor& a, V b) {
  if (b < 0) throw std::invalid_argument("int elementwise: scalar operand must be non-negative");
  if ((op == BinaryOp::div || op == BinaryOp::floor_div || op == BinaryOp::mod) && b == 0) {
    throw std::domain_error("int elementwise: division by zero");
  }
  std::vector<V> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, a[i], b);
  return IntTensor(a.shape(), std::move(out));
}

}  // namespace bpsnn
