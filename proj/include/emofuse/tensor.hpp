#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace emofuse {

using Vec = std::vector<double>;

/// Dense row-major double array of rank 1 (len) or rank 2 (rows x cols).
/// A rank-1 tensor reports rows() == len and cols() == 1.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t len);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  /// Checked constructors: throw ShapeError on a size mismatch and
  /// std::domain_error on NaN/Inf.
  static Tensor vector(Vec data);
  static Tensor matrix(std::size_t rows, std::size_t cols, Vec data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool is_vector() const { return rank_ == 1; }
  bool same_shape(const Tensor& other) const {
    return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Tensor(int rank, std::size_t rows, std::size_t cols, Vec data)
      : rank_(rank), rows_(rows), cols_(cols), data_(std::move(data)) {}

  int rank_ = 1;
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  Vec data_;
};

/// A learned weight with its additive gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value) { grad.fill(0.0); }

  void zero_grad() { grad.fill(0.0); }
};

/// Throws ShapeError with `what` when `ok` is false.
void require_shape(bool ok, const std::string& what);

}  // namespace emofuse
