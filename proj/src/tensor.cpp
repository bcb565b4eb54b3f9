#include "tensor.hpp"

#include <numeric>

namespace abslab {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += ")";
  return s;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  Tensor t;
  t.d_ = std::make_shared<TensorData>();
  t.d_->shape = std::move(shape);
  t.d_->value.assign(shape_size(t.d_->shape), 0.0);
  t.d_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != shape_size(shape)) {
    throw DimensionError("tensor: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_str(shape));
  }
  Tensor t;
  t.d_ = std::make_shared<TensorData>();
  t.d_->shape = std::move(shape);
  t.d_->value = std::move(values);
  t.d_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({}, {v}, requires_grad);
}

std::size_t Tensor::rows() const {
  if (d_->shape.size() != 2) throw DimensionError("rows: tensor is not a matrix");
  return d_->shape[0];
}

std::size_t Tensor::cols() const {
  if (d_->shape.size() != 2) throw DimensionError("cols: tensor is not a matrix");
  return d_->shape[1];
}

double Tensor::scalar_value() const {
  if (size() != 1) throw DimensionError("scalar_value: tensor has " + std::to_string(size()) + " elements");
  return d_->value[0];
}

std::vector<double>& Tensor::grad() const {
  if (d_->grad.empty()) d_->grad.assign(d_->value.size(), 0.0);
  return d_->grad;
}

void Tensor::zero_grad() const {
  if (!d_->grad.empty()) d_->grad.assign(d_->value.size(), 0.0);
}

void Tensor::accumulate_grad(std::size_t i, double g) const {
  grad()[i] += g;
}

Tensor Tensor::clone(bool requires_grad) const {
  Tensor t;
  t.d_ = std::make_shared<TensorData>();
  t.d_->shape = d_->shape;
  t.d_->value = d_->value;
  t.d_->requires_grad = requires_grad;
  return t;
}

void Tape::backward(Tensor loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw NumericError("backward: loss does not depend on any requires_grad tensor");
  }
  loss.grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

}  // namespace abslab
