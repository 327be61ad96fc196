#pragma once

// Dense double-precision inner loops behind conv2d, linear and the SNR
// reduction. Each entry has a scalar reference implementation and, on x86-64
// builds, an AVX2/FMA variant; the active table is chosen once at startup
// from CPUID and can be overridden with BPSNN_SIMD=scalar|avx2 or select().
//
// All matrices are row-major and dense. The gemm variants accumulate into C.

#include <cstddef>
#include <string_view>

namespace bpsnn::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // C[M,N] += A[M,K] * B[K,N]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[M,N] += A[M,K] * B[N,K]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
  // C[M,N] += A[K,M]^T * B[K,N]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

  double (*dot)(std::size_t n, const double* x, const double* y);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in.
const KernelTable* avx2_table() noexcept;

bool cpu_supports(Isa isa) noexcept;

// Best compiled-in table the CPU supports, honoring BPSNN_SIMD.
const KernelTable& active() noexcept;

// Throws std::invalid_argument when the variant is unavailable.
void select(Isa isa);
void select(std::string_view name);

}  // namespace bpsnn::kernels
