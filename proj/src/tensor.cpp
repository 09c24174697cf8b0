#include "shapelab/tensor.hpp"

#include <sstream>

namespace shapelab {

int shape_product(const std::vector<int>& shape) {
  int p = 1;
  for (int e : shape) {
    if (e < 0) throw DimensionError("negative extent in shape");
    p *= e;
  }
  return p;
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      size_(shape_product(shape_)),
      data_(std::make_shared<std::vector<double>>(static_cast<std::size_t>(size_), 0.0)) {}

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  Tensor t;
  t.shape_ = std::move(shape);
  t.size_ = shape_product(t.shape_);
  if (t.size_ != static_cast<int>(values.size())) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + t.shape_str());
  }
  t.data_ = std::make_shared<std::vector<double>>(std::move(values));
  return t;
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

void Tensor::set_requires_grad(bool on) {
  if (on) {
    if (!grad_) grad_ = std::make_shared<std::vector<double>>(static_cast<std::size_t>(size_), 0.0);
  } else {
    grad_.reset();
  }
}

double* Tensor::grad() {
  if (!grad_) throw StateError("tensor has no gradient buffer");
  return grad_->data();
}

const double* Tensor::grad() const {
  if (!grad_) throw StateError("tensor has no gradient buffer");
  return grad_->data();
}

void Tensor::zero_grad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.size_ = size_;
  if (data_) t.data_ = std::make_shared<std::vector<double>>(*data_);
  if (grad_) t.grad_ = std::make_shared<std::vector<double>>(*grad_);
  return t;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
  if (shape_product(new_shape) != size_) {
    throw DimensionError("cannot reshape " + shape_str() + " to new size");
  }
  Tensor t = *this;
  t.shape_ = std::move(new_shape);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace shapelab
