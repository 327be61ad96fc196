// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "bpsnn/kernels.hpp"

namespace bpsnn::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// C[M,N] += op(A) * B where op(A)(i,p) = a[i*row_stride + p*col_stride].
// Register tile: 4 rows x 8 columns. Column panels outermost so the K x 8
// slice of B stays in L1 across the row blocks.
void gemm_strided(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t row_stride,
                  std::size_t col_stride, const double* b, double* c) {
  const std::size_t n8 = n - n % 8;
  const std::size_t m4 = m - m % 4;

  for (std::size_t j = 0; j < n8; j += 8) {
    std::size_t i = 0;
    for (; i < m4; i += 4) {
      double* c0 = c + (i + 0) * n + j;
      double* c1 = c + (i + 1) * n + j;
      double* c2 = c + (i + 2) * n + j;
      double* c3 = c + (i + 3) * n + j;
      __m256d c00 = _mm256_loadu_pd(c0), c01 = _mm256_loadu_pd(c0 + 4);
      __m256d c10 = _mm256_loadu_pd(c1), c11 = _mm256_loadu_pd(c1 + 4);
      __m256d c20 = _mm256_loadu_pd(c2), c21 = _mm256_loadu_pd(c2 + 4);
      __m256d c30 = _mm256_loadu_pd(c3), c31 = _mm256_loadu_pd(c3 + 4);
      const double* ai = a + i * row_stride;
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n + j;
        const __m256d b0 = _mm256_loadu_pd(brow);
        const __m256d b1 = _mm256_loadu_pd(brow + 4);
        const double* ap = ai + p * col_stride;
        __m256d av = _mm256_broadcast_sd(ap);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(ap + row_stride);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(ap + 2 * row_stride);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(ap + 3 * row_stride);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      _mm256_storeu_pd(c0, c00), _mm256_storeu_pd(c0 + 4, c01);
      _mm256_storeu_pd(c1, c10), _mm256_storeu_pd(c1 + 4, c11);
      _mm256_storeu_pd(c2, c20), _mm256_storeu_pd(c2 + 4, c21);
      _mm256_storeu_pd(c3, c30), _mm256_storeu_pd(c3 + 4, c31);
    }
    for (; i < m; ++i) {
      double* ci = c + i * n + j;
      __m256d acc0 = _mm256_loadu_pd(ci), acc1 = _mm256_loadu_pd(ci + 4);
      const double* ai = a + i * row_stride;
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n + j;
        const __m256d av = _mm256_broadcast_sd(ai + p * col_stride);
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), acc1);
      }
      _mm256_storeu_pd(ci, acc0);
      _mm256_storeu_pd(ci + 4, acc1);
    }
  }

  if (n8 == n) return;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * row_stride;
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p * col_stride];
      const double* brow = b + p * n;
      for (std::size_t j = n8; j < n; ++j) ci[j] += aip * brow[j];
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  gemm_strided(m, n, k, a, k, 1, b, c);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  gemm_strided(m, n, k, a, 1, m, b, c);
}

// Dot-product form: 2 rows of A against 4 rows of B per tile.
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  const std::size_t k4 = k - k % 4;
  auto tail = [&](const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t p = k4; p < k; ++p) s += x[p] * y[p];
    return s;
  };

  const std::size_t m2 = m - m % 2;
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < m2; i += 2) {
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    std::size_t j = 0;
    for (; j < n4; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd(), s02 = _mm256_setzero_pd(),
              s03 = _mm256_setzero_pd();
      __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd(), s12 = _mm256_setzero_pd(),
              s13 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k4; p += 4) {
        const __m256d x0 = _mm256_loadu_pd(a0 + p);
        const __m256d x1 = _mm256_loadu_pd(a1 + p);
        __m256d y = _mm256_loadu_pd(b0 + p);
        s00 = _mm256_fmadd_pd(x0, y, s00);
        s10 = _mm256_fmadd_pd(x1, y, s10);
        y = _mm256_loadu_pd(b1 + p);
        s01 = _mm256_fmadd_pd(x0, y, s01);
        s11 = _mm256_fmadd_pd(x1, y, s11);
        y = _mm256_loadu_pd(b2 + p);
        s02 = _mm256_fmadd_pd(x0, y, s02);
        s12 = _mm256_fmadd_pd(x1, y, s12);
        y = _mm256_loadu_pd(b3 + p);
        s03 = _mm256_fmadd_pd(x0, y, s03);
        s13 = _mm256_fmadd_pd(x1, y, s13);
      }
      double* c0 = c + i * n + j;
      double* c1 = c0 + n;
      c0[0] += hsum(s00) + tail(a0, b0);
      c0[1] += hsum(s01) + tail(a0, b1);
      c0[2] += hsum(s02) + tail(a0, b2);
      c0[3] += hsum(s03) + tail(a0, b3);
      c1[0] += hsum(s10) + tail(a1, b0);
      c1[1] += hsum(s11) + tail(a1, b1);
      c1[2] += hsum(s12) + tail(a1, b2);
      c1[3] += hsum(s13) + tail(a1, b3);
    }
    for (; j < n; ++j) {
      const double* bj = b + j * k;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k4; p += 4) {
        const __m256d y = _mm256_loadu_pd(bj + p);
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + p), y, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + p), y, s1);
      }
      c[i * n + j] += hsum(s0) + tail(a0, bj);
      c[(i + 1) * n + j] += hsum(s1) + tail(a1, bj);
    }
  }
  for (std::size_t i = m2; i < m; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      __m256d s = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k4; p += 4) s = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), s);
      c[i * n + j] += hsum(s) + tail(ai, bj);
    }
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kTable{Isa::avx2, "avx2", gemm_nn, gemm_nt, gemm_tn, dot, axpy};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kTable; }

}  // namespace bpsnn::kernels
