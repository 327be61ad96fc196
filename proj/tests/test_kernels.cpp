#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "bpsnn/kernels.hpp"
#include "bpsnn/ops.hpp"
#include "oracles.hpp"

using namespace bpsnn;

namespace {

const kernels::KernelTable* simd_or_skip() {
  const auto* t = kernels::avx2_table();
  if (!t || !kernels::cpu_supports(kernels::Isa::avx2)) return nullptr;
  return t;
}

// Transpose of a (rows, cols) row-major matrix.
std::vector<double> transpose(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  std::vector<double> t(a.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = a[i * cols + j];
  return t;
}

void expect_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_LE(oracle::rel_error(got[i], want[i], 1.0), tol) << "at " << i;
  }
}

struct Dims {
  std::size_t m, n, k;
};
const Dims kSizes[] = {{1, 1, 1}, {3, 5, 7}, {4, 8, 16}, {5, 9, 3}, {17, 33, 9}, {16, 196, 72}, {10, 1, 129}};

void check_table(const kernels::KernelTable& t) {
  for (auto [m, n, k] : kSizes) {
    const auto a = oracle::random_vector(m * k, m + 1);
    const auto b = oracle::random_vector(k * n, n + 2);
    const auto c0 = oracle::random_vector(m * n, k + 3);
    auto want = oracle::matmul(a, b, m, k, n);
    for (std::size_t i = 0; i < want.size(); ++i) want[i] += c0[i];

    auto c = c0;
    t.gemm_nn(m, n, k, a.data(), b.data(), c.data());
    expect_close(c, want, 1e-12);

    c = c0;
    const auto bt = transpose(b, k, n);
    t.gemm_nt(m, n, k, a.data(), bt.data(), c.data());
    expect_close(c, want, 1e-12);

    c = c0;
    const auto at = transpose(a, m, k);
    t.gemm_tn(m, n, k, at.data(), b.data(), c.data());
    expect_close(c, want, 1e-12);
  }
  for (std::size_t n : {1u, 3u, 4u, 15u, 16u, 17u, 1000u}) {
    const auto x = oracle::random_vector(n, 40 + n);
    auto y = oracle::random_vector(n, 50 + n);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
    EXPECT_LE(oracle::rel_error(t.dot(n, x.data(), y.data()), dot, 1.0), 1e-12);
    auto want = y;
    for (std::size_t i = 0; i < n; ++i) want[i] += -0.75 * x[i];
    t.axpy(n, -0.75, x.data(), y.data());
    expect_close(y, want, 1e-14);
  }
}

}  // namespace

TEST(Kernels, ScalarMatchesOracle) { check_table(kernels::scalar_table()); }

TEST(Kernels, Avx2MatchesOracle) {
  const auto* t = simd_or_skip();
  if (!t) GTEST_SKIP() << "AVX2 variant not available";
  check_table(*t);
}

TEST(Kernels, Avx2MatchesScalar) {
  const auto* simd = simd_or_skip();
  if (!simd) GTEST_SKIP() << "AVX2 variant not available";
  const auto& ref = kernels::scalar_table();
  for (auto [m, n, k] : kSizes) {
    const auto a = oracle::random_vector(m * k, 7);
    const auto b = oracle::random_vector(k * n, 8);
    std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);
    ref.gemm_nn(m, n, k, a.data(), b.data(), c1.data());
    simd->gemm_nn(m, n, k, a.data(), b.data(), c2.data());
    expect_close(c2, c1, 1e-12);
  }
}

TEST(Kernels, SelectAndConvAgree) {
  if (!simd_or_skip()) GTEST_SKIP() << "AVX2 variant not available";
  const Tensor x({2, 3, 9, 9}, oracle::random_vector(486, 9));
  const Tensor w({4, 3, 3, 3}, oracle::random_vector(108, 10));
  kernels::select("scalar");
  EXPECT_EQ(kernels::active().isa, kernels::Isa::scalar);
  const Tensor y1 = conv2d(x, w, {2, 1});
  kernels::select("avx2");
  EXPECT_EQ(kernels::active().isa, kernels::Isa::avx2);
  const Tensor y2 = conv2d(x, w, {2, 1});
  kernels::select("auto");
  for (std::size_t i = 0; i < y1.numel(); ++i) EXPECT_LE(oracle::rel_error(y1[i], y2[i], 1.0), 1e-12);
}

TEST(Kernels, UnknownVariantRejected) { EXPECT_THROW(kernels::select("sse9"), std::invalid_argument); }
