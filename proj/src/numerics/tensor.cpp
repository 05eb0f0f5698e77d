#include "alternator/numerics/tensor.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "alternator/errors.hpp"

namespace alternator {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) {
    throw DimensionError("tensor: shape " + shape_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values));
}

std::size_t Tensor::rank_error() const {
  if (shape_.empty()) return 0;
  throw DimensionError("tensor: rank-2 view of shape " + shape_string(shape_));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ContractError("tensor: item() on shape " + shape_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const { return Tensor(std::move(shape), data_); }

Tensor Tensor::row_slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw DimensionError("tensor: row slice out of range");
  const std::size_t c = cols();
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * c),
                          data_.begin() + static_cast<std::ptrdiff_t>(end * c));
  return Tensor({end - begin, c}, std::move(out));
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor concat_rows(std::span<const Tensor> blocks) {
  if (blocks.empty()) return {};
  const std::size_t c = blocks.front().cols();
  std::size_t r = 0;
  for (const auto& b : blocks) {
    if (b.cols() != c) throw DimensionError("concat_rows: column mismatch");
    r += b.rows();
  }
  Tensor out = Tensor::zeros(r, c);
  double* dst = out.data();
  for (const auto& b : blocks) {
    if (b.size()) std::memcpy(dst, b.data(), b.size() * sizeof(double));
    dst += b.size();
  }
  return out;
}

}  // namespace alternator
