#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

// Dense inner loops used by every forward/backward pass.
//
// Each kernel has a scalar reference and, on x86-64, an AVX2 variant chosen at
// runtime. The vector variants only parallelize across independent output
// elements; every output element sees the same sequence of IEEE multiplies and
// adds (no FMA, left-to-right over the reduction index) as the scalar
// reference, so the two agree bit for bit. Reductions to a single scalar stay
// scalar for the same reason.

namespace emofuse::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
std::optional<Isa> isa_from_string(std::string_view s);

struct KernelTable {
  Isa isa;
  /// y = W x; W is rows x cols row-major.
  void (*matvec)(const double* W, std::size_t rows, std::size_t cols, const double* x, double* y);
  /// gx += W^T g.
  void (*matvec_t_acc)(const double* W, std::size_t rows, std::size_t cols, const double* g, double* gx);
  /// G += g x^T.
  void (*outer_acc)(double* G, std::size_t rows, std::size_t cols, const double* g, const double* x);
  /// y += a x.
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y += x.
  void (*add)(const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the build has no AVX2 variant.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);
/// Best ISA supported by both the build and the CPU.
Isa best_available();

/// Kernel table used by the library. Defaults to best_available(), unless the
/// EMOFUSE_ISA environment variable names a supported ISA.
const KernelTable& active();
/// Throws std::runtime_error when `isa` is not available.
void select(Isa isa);

class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active().isa) { select(isa); }
  ~ScopedIsa() { select(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// Span front-ends over active(); sizes are the caller's responsibility.
inline void matvec(std::span<const double> W, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::span<double> y) {
  active().matvec(W.data(), rows, cols, x.data(), y.data());
}
inline void matvec_t_acc(std::span<const double> W, std::size_t rows, std::size_t cols,
                         std::span<const double> g, std::span<double> gx) {
  active().matvec_t_acc(W.data(), rows, cols, g.data(), gx.data());
}
inline void outer_acc(std::span<double> G, std::size_t rows, std::size_t cols,
                      std::span<const double> g, std::span<const double> x) {
  active().outer_acc(G.data(), rows, cols, g.data(), x.data());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void add(std::span<const double> x, std::span<double> y) {
  active().add(x.data(), y.data(), x.size());
}

/// Left-to-right dot product.
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace emofuse::kernels
