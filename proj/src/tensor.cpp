#include "bpsnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bpsnn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ')';
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : shape_(std::move(shape)), node_(std::make_shared<detail::Node>()) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive: " + shape_str(shape_));
  }
  if (shape_numel(shape_) != data.size()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_str(shape_));
  }
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

std::span<const double> Tensor::data() const noexcept {
  if (!node_) return {};
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) throw std::logic_error("mutable_data on an undefined tensor");
  return node_->data;
}

std::span<const double> Tensor::grad() const noexcept {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item() needs a single-element tensor, got " + shape_str(shape_));
  return node_->data[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    throw std::invalid_argument("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  Tensor view;
  view.shape_ = std::move(shape);
  view.node_ = node_;
  return view;
}

Tensor Tensor::detach() const {
  if (!node_) return {};
  return Tensor(shape_, node_->data, false);
}

// ---------------------------------------------------------------------------

void Tape::record(std::vector<detail::NodePtr> inputs, std::vector<detail::NodePtr> outputs,
                  BackwardFn backward) {
  entries_.push_back({std::move(inputs), std::move(outputs), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw std::invalid_argument("backward needs a scalar loss, got " + shape_str(loss.shape()));
  }
  if (entries_.empty()) throw std::logic_error("backward called on an empty tape");
  if (!loss.requires_grad()) return;

  loss.node()->ensure_grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const bool reached = std::any_of(it->outputs.begin(), it->outputs.end(),
                                     [](const detail::NodePtr& n) { return !n->grad.empty(); });
    if (reached) it->backward();
  }
}

namespace {
thread_local Tape* current_tape = nullptr;
}

TapeScope::TapeScope(Tape& tape) noexcept : previous_(current_tape) { current_tape = &tape; }
TapeScope::~TapeScope() { current_tape = previous_; }

Tape* active_tape() noexcept { return current_tape; }

namespace detail {

Tape* recording_tape(std::initializer_list<const Tensor*> inputs) noexcept {
  if (!current_tape) return nullptr;
  for (const Tensor* t : inputs) {
    if (t && t->requires_grad()) return current_tape;
  }
  return nullptr;
}

Tensor make_result(Shape shape, std::vector<double> data, bool record) {
  return Tensor(std::move(shape), std::move(data), record);
}

}  // namespace detail
}  // namespace bpsnn
