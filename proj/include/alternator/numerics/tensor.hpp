#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace alternator {

// Dense row-major array of doubles. Rank-2 is the working case for every
// model computation (rows = batch/time, cols = feature dimension).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor filled(std::size_t rows, std::size_t cols, double v) { return Tensor({rows, cols}, v); }
  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  static Tensor row(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-2 view. A rank-1 tensor of length n is treated as 1 x n.
  std::size_t rows() const {
    if (shape_.size() == 2) return shape_[0];
    return shape_.size() == 1 ? 1 : rank_error();
  }
  std::size_t cols() const {
    if (shape_.size() == 2) return shape_[1];
    return shape_.size() == 1 ? shape_[0] : rank_error();
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row_span(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double item() const;
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  Tensor reshaped(std::vector<std::size_t> shape) const;
  Tensor row_slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  // 0 for an empty shape, throws for rank > 2.
  std::size_t rank_error() const;

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

// Stack rank-2 blocks with equal column counts on top of each other.
Tensor concat_rows(std::span<const Tensor> blocks);

}  // namespace alternator
