#pragma once

// Non-negative integer tensors: raw images, converted color channels and the
// integer side of bit-plane extraction. Arithmetic here is exact.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bpsnn/ops.hpp"
#include "bpsnn/tensor.hpp"

namespace bpsnn {

class IntTensor {
 public:
  using value_type = std::int32_t;

  IntTensor() = default;
  IntTensor(Shape shape, std::vector<value_type> data);

  static IntTensor zeros(Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const value_type> data() const noexcept { return data_; }
  value_type operator[](std::size_t i) const { return data_[i]; }

  value_type max() const;

  Tensor to_real() const;

  friend bool operator==(const IntTensor&, const IntTensor&) = default;

 private:
  Shape shape_;
  std::vector<value_type> data_;
};

// Integer elementwise ops. `sub` rejects negative results, `floor_div` and
// `mod` reject zero divisors.
IntTensor elementwise(BinaryOp op, const IntTensor& a, const IntTensor& b);
IntTensor elementwise(BinaryOp op, const IntTensor& a, IntTensor::value_type b);

inline IntTensor add(const IntTensor& a, const IntTensor& b) { return elementwise(BinaryOp::add, a, b); }
inline IntTensor floor_div(const IntTensor& a, IntTensor::value_type b) { return elementwise(BinaryOp::floor_div, a, b); }
inline IntTensor mod(const IntTensor& a, IntTensor::value_type b) { return elementwise(BinaryOp::mod, a, b); }

}  // namespace bpsnn
