#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's math; only plain loops over std::vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

// (m,k) x (k,n)
inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                  std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

struct ConvDims {
  std::size_t batch, cin, h, w, cout, kh, kw, stride, pad;
  std::size_t ho() const { return (h + 2 * pad - kh) / stride + 1; }
  std::size_t wo() const { return (w + 2 * pad - kw) / stride + 1; }
};

// Direct cross-correlation, no im2col.
inline std::vector<double> conv2d(const std::vector<double>& x, const std::vector<double>& wt,
                                  const std::vector<double>& bias, const ConvDims& d) {
  std::vector<double> out(d.batch * d.cout * d.ho() * d.wo(), 0.0);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t o = 0; o < d.cout; ++o)
      for (std::size_t y = 0; y < d.ho(); ++y)
        for (std::size_t xx = 0; xx < d.wo(); ++xx) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < d.cin; ++c)
            for (std::size_t i = 0; i < d.kh; ++i)
              for (std::size_t j = 0; j < d.kw; ++j) {
                const long iy = static_cast<long>(y * d.stride + i) - static_cast<long>(d.pad);
                const long ix = static_cast<long>(xx * d.stride + j) - static_cast<long>(d.pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.h) || ix >= static_cast<long>(d.w)) continue;
                acc += x[((b * d.cin + c) * d.h + iy) * d.w + ix] * wt[((o * d.cin + c) * d.kh + i) * d.kw + j];
              }
          out[((b * d.cout + o) * d.ho() + y) * d.wo() + xx] = acc;
        }
  return out;
}

// Central difference of f at x along every coordinate.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double step = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// |a - b| / max(|a|, |b|, floor)
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_error(a[i], b[i], floor));
  return worst;
}

}  // namespace oracle
