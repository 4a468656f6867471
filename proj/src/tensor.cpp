#include "emofuse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emofuse/error.hpp"

namespace emofuse {

Tensor Tensor::zeros(std::size_t len) { return Tensor(1, len, 1, Vec(len, 0.0)); }

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return Tensor(2, rows, cols, Vec(rows * cols, 0.0));
}

Tensor Tensor::vector(Vec data) {
  Tensor t(1, data.size(), 1, std::move(data));
  if (!t.all_finite()) throw std::domain_error("tensor: non-finite value");
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, Vec data) {
  require_shape(data.size() == rows * cols, "tensor: data length does not match shape");
  Tensor t(2, rows, cols, std::move(data));
  if (!t.all_finite()) throw std::domain_error("tensor: non-finite value");
  return t;
}

std::string Tensor::shape_string() const {
  if (rank_ == 1) return "(" + std::to_string(rows_) + ",)";
  return "(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace emofuse
