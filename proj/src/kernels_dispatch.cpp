#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bpsnn/kernels.hpp"

namespace bpsnn::kernels {

#ifndef BPSNN_HAS_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* usable(Isa isa) noexcept {
  if (isa == Isa::scalar) return &scalar_table();
  const KernelTable* table = avx2_table();
  return (table && cpu_supports(Isa::avx2)) ? table : nullptr;
}

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("BPSNN_SIMD")) {
    const std::string want = env;
    if (want == "scalar") return &scalar_table();
    if (want == "avx2") {
      if (const KernelTable* t = usable(Isa::avx2)) return t;
    }
  }
  if (const KernelTable* t = usable(Isa::avx2)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
  const KernelTable* table = usable(isa);
  if (!table) throw std::invalid_argument("kernel variant not available on this build/CPU");
  current().store(table, std::memory_order_release);
}

void select(std::string_view name) {
  if (name == "scalar") return select(Isa::scalar);
  if (name == "avx2") return select(Isa::avx2);
  if (name == "auto") {
    current().store(usable(Isa::avx2) ? usable(Isa::avx2) : &scalar_table(), std::memory_order_release);
    return;
  }
  throw std::invalid_argument("unknown kernel variant '" + std::string(name) + "' (expected scalar, avx2 or auto)");
}

}  // namespace bpsnn::kernels
