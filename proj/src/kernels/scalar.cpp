#include "emofuse/kernels.hpp"

namespace emofuse::kernels {
namespace {

void matvec(const double* W, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* w = W + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += w[j] * x[j];
    y[i] = acc;
  }
}

void matvec_t_acc(const double* W, std::size_t rows, std::size_t cols, const double* g, double* gx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* w = W + i * cols;
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) gx[j] += w[j] * gi;
  }
}

void outer_acc(double* G, std::size_t rows, std::size_t cols, const double* g, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = G + i * cols;
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void add(const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += x[j];
}

constexpr KernelTable kScalar{Isa::scalar, &matvec, &matvec_t_acc, &outer_acc, &axpy, &add};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace emofuse::kernels
