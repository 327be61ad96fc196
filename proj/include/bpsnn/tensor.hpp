#pragma once

// Dense 64-bit tensors with reverse-mode differentiation.
//
// A Tensor is a cheap handle onto a shared node holding flat row-major data
// and an optional gradient accumulator. Operations never modify their inputs;
// when a Tape is active on the calling thread and any input requires a
// gradient, the operation appends a backward rule to that tape.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bpsnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  std::vector<double> data;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

using NodePtr = std::shared_ptr<Node>;

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const noexcept { return node_ ? node_->data.size() : 0; }
  bool defined() const noexcept { return node_ != nullptr; }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }

  std::span<const double> data() const noexcept;
  // Direct writes bypass the tape; meant for parameter updates and fixtures.
  std::span<double> mutable_data();

  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  std::span<const double> grad() const noexcept;
  void zero_grad();

  double item() const;
  double operator[](std::size_t i) const { return node_->data[i]; }

  // Same storage and gradient buffer, different shape.
  Tensor reshaped(Shape shape) const;
  // Copy of the values, cut off from any tape.
  Tensor detach() const;

  const detail::NodePtr& node() const noexcept { return node_; }

 private:
  Shape shape_;
  detail::NodePtr node_;
};

class Tape {
 public:
  using BackwardFn = std::function<void()>;

  void record(std::vector<detail::NodePtr> inputs,
              std::vector<detail::NodePtr> outputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and replays every recorded rule once, newest
  // first. A loss that does not require a gradient leaves all grads alone.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  void clear() noexcept { entries_.clear(); }

 private:
  struct Entry {
    std::vector<detail::NodePtr> inputs;
    std::vector<detail::NodePtr> outputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

// Makes `tape` the recording target of this thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) noexcept;
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape() noexcept;

namespace detail {

// Non-null when an op over `inputs` must be recorded.
Tape* recording_tape(std::initializer_list<const Tensor*> inputs) noexcept;

// Output tensor whose requires_grad follows `record`.
Tensor make_result(Shape shape, std::vector<double> data, bool record);

}  // namespace detail

}  // namespace bpsnn
