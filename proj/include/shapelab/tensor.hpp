#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "shapelab/errors.hpp"

namespace shapelab {

// Dense row-major tensor of 64-bit floats.
//
// Copying a Tensor copies the handle, not the storage: two copies alias
// the same data and gradient buffers (clone() makes a deep copy). This
// is what lets tape leaves share a parameter's gradient buffer with the
// optimizer.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape);
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double v);

  const std::vector<int>& shape() const { return shape_; }
  int size() const { return size_; }
  int extent(int axis) const {
    if (axis < 0 || axis >= rank()) {
      throw IndexError("axis " + std::to_string(axis) + " out of range for " + shape_str());
    }
    return shape_[static_cast<std::size_t>(axis)];
  }
  int rank() const { return static_cast<int>(shape_.size()); }

  double* data() { return data_->data(); }
  const double* data() const { return data_->data(); }
  double& operator[](int i) { return (*data_)[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return (*data_)[static_cast<std::size_t>(i)]; }

  // Allocates a zeroed gradient buffer; tape backward passes accumulate
  // into it for leaf tensors.
  void set_requires_grad(bool on);
  bool has_grad() const { return grad_ != nullptr; }
  double* grad();
  const double* grad() const;
  void zero_grad();

  Tensor clone() const;

  // View with a different shape over the same storage and gradient.
  Tensor reshaped(std::vector<int> new_shape) const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  int size_ = 0;
  std::shared_ptr<std::vector<double>> data_;
  std::shared_ptr<std::vector<double>> grad_;
};

int shape_product(const std::vector<int>& shape);

}  // namespace shapelab
