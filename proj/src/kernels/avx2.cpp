// Compiled with -mavx2 (no -mfma); only reached after a runtime CPU check.

#include <immintrin.h>

#include "emofuse/kernels.hpp"

namespace emofuse::kernels {
namespace {

// Rows i..i+3 are processed together: four 4-wide row loads are transposed so
// that lane r accumulates row i+r in the same j order as the scalar loop.
void matvec(const double* W, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    const double* w0 = W + i * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      const __m256d r0 = _mm256_loadu_pd(w0 + j);
      const __m256d r1 = _mm256_loadu_pd(w1 + j);
      const __m256d r2 = _mm256_loadu_pd(w2 + j);
      const __m256d r3 = _mm256_loadu_pd(w3 + j);
      const __m256d t0 = _mm256_unpacklo_pd(r0, r1);
      const __m256d t1 = _mm256_unpackhi_pd(r0, r1);
      const __m256d t2 = _mm256_unpacklo_pd(r2, r3);
      const __m256d t3 = _mm256_unpackhi_pd(r2, r3);
      const __m256d c0 = _mm256_permute2f128_pd(t0, t2, 0x20);
      const __m256d c1 = _mm256_permute2f128_pd(t1, t3, 0x20);
      const __m256d c2 = _mm256_permute2f128_pd(t0, t2, 0x31);
      const __m256d c3 = _mm256_permute2f128_pd(t1, t3, 0x31);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(c0, _mm256_set1_pd(x[j])));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(c1, _mm256_set1_pd(x[j + 1])));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(c2, _mm256_set1_pd(x[j + 2])));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(c3, _mm256_set1_pd(x[j + 3])));
    }
    for (; j < cols; ++j) {
      const __m256d c = _mm256_set_pd(w3[j], w2[j], w1[j], w0[j]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(c, _mm256_set1_pd(x[j])));
    }
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < rows; ++i) {
    const double* w = W + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += w[j] * x[j];
    y[i] = acc;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + j));
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j), prod));
  }
  for (; j < n; ++j) y[j] += a * x[j];
}

void add(const double* x, double* y, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_loadu_pd(x + j)));
  }
  for (; j < n; ++j) y[j] += x[j];
}

// Scalar form is gx[j] += w[j] * g[i]; multiplication commutes exactly.
void matvec_t_acc(const double* W, std::size_t rows, std::size_t cols, const double* g, double* gx) {
  for (std::size_t i = 0; i < rows; ++i) axpy(g[i], W + i * cols, gx, cols);
}

void outer_acc(double* G, std::size_t rows, std::size_t cols, const double* g, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) axpy(g[i], x, G + i * cols, cols);
}

constexpr KernelTable kAvx2{Isa::avx2, &matvec, &matvec_t_acc, &outer_acc, &axpy, &add};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace emofuse::kernels
