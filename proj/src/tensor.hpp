#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"

namespace abslab {

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

struct TensorData {
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // lazily allocated, same length as value
  bool requires_grad = false;
};

// Shared-storage handle. Copies alias the same values/gradient, which is what
// both the tape closures and decoder state snapshots rely on.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return d_->shape; }
  std::size_t size() const { return d_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool requires_grad() const { return d_->requires_grad; }

  // The handle is shallow-const: storage stays shared and mutable through
  // copies, which is what tape closures rely on.
  std::vector<double>& value() const { return d_->value; }
  double operator[](std::size_t i) const { return d_->value[i]; }
  double at(std::size_t r, std::size_t c) const { return d_->value[r * cols() + c]; }
  double scalar_value() const;

  // Allocates (zero-filled) on first access.
  std::vector<double>& grad() const;
  bool has_grad() const { return !d_->grad.empty(); }
  void zero_grad() const;
  void accumulate_grad(std::size_t i, double g) const;

  // Deep copy; the copy never requires gradients unless asked.
  Tensor clone(bool requires_grad = false) const;

  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

// Ordered record of primitive operations. Replaying the recorded adjoint
// closures in reverse order yields gradients for every requires_grad tensor
// reachable from the loss. Single-threaded by contract; independent tapes may
// run concurrently.
class Tape {
 public:
  // Recording can be switched off for inference-only evaluation; forward
  // values are still computed, adjoints are simply not recorded.
  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

  void record(std::function<void()> backward) {
    if (recording_) nodes_.push_back(std::move(backward));
  }

  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and replays adjoints in reverse tape order.
  void backward(Tensor loss);

  void clear() { nodes_.clear(); }

 private:
  std::vector<std::function<void()>> nodes_;
  bool recording_ = true;
};

}  // namespace abslab
