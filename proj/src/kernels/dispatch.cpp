#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "emofuse/kernels.hpp"

namespace emofuse::kernels {

#if !defined(EMOFUSE_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

std::optional<Isa> isa_from_string(std::string_view s) {
  if (s == "scalar") return Isa::scalar;
  if (s == "avx2") return Isa::avx2;
  return std::nullopt;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(EMOFUSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa best_available() { return cpu_supports(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

namespace {

const KernelTable* table_for(Isa isa) {
  if (!cpu_supports(isa)) throw std::runtime_error("kernel ISA unavailable: " + std::string(to_string(isa)));
  return isa == Isa::avx2 ? avx2_table() : &scalar_table();
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("EMOFUSE_ISA")) {
    if (auto isa = isa_from_string(env); isa && cpu_supports(*isa)) return table_for(*isa);
  }
  return table_for(best_available());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(table_for(isa), std::memory_order_relaxed); }

}  // namespace emofuse::kernels
