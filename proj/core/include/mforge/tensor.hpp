#pragma once

#include <string>
#include <vector>

namespace mforge {

// Dense row-major fp64 array. Image tensors use (channels, height, width)
// layout throughout the project; dense vectors are rank-1, weight matrices
// rank-2 (rows, cols), convolution kernels rank-4 (out_ch, in_ch, kh, kw).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  static Tensor scalar(double v);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

  // (c, y, x) accessors for rank-3 image tensors.
  double& at(int c, int y, int x) {
    return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }
  double at(int c, int y, int x) const {
    return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  void fill(double v);
  void add_scaled(const Tensor& other, double scale);  // *this += scale * other
  double max_abs() const;
  bool all_finite() const;

  // "(8, 1, 3, 3)" rendering for diagnostics.
  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

int shape_product(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace mforge
