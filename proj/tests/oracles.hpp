#pragma once

// Brute-force reference values used by the unit and acceptance tests. Kept
// deliberately independent of src/gauss.cpp: no erfc, no Genz coefficients.

#include <cmath>
#include <utility>
#include <vector>

namespace beliefclt::testing {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::vector<std::pair<long double, long double>> gauss_legendre(int n) {
  const long double pi = 3.141592653589793238462643383279502884L;
  std::vector<std::pair<long double, long double>> out;
  for (int i = 1; i <= n; ++i) {
    long double x = std::cos(pi * (i - 0.25L) / (n + 0.5L));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double step = p1 / dp;
      x -= step;
      if (std::fabs(step) < 1e-19L) break;
    }
    out.emplace_back(x, 2 / ((1 - x * x) * dp * dp));
  }
  return out;
}

// Composite 10-point Gauss-Legendre over [lo, hi] with panels no wider than width.
template <class F>
long double composite(F&& f, long double lo, long double hi, long double width = 0.25L) {
  static const auto rule = gauss_legendre(10);
  if (!(hi > lo)) return 0;
  const int panels = static_cast<int>(std::ceil((hi - lo) / width));
  const long double h = (hi - lo) / panels;
  long double total = 0;
  for (int p = 0; p < panels; ++p) {
    const long double mid = lo + (p + 0.5L) * h;
    for (const auto& [x, w] : rule) total += w * f(mid + 0.5L * h * x);
  }
  return total * 0.5L * h;
}

inline long double normal_density(long double x) {
  return std::exp(-0.5L * x * x) / std::sqrt(2 * 3.141592653589793238462643383279502884L);
}

// Phi(x) by integrating the density from whichever tail keeps the result
// free of cancellation.
inline double phi_oracle(double x) {
  const long double lo = -40;
  if (x <= 0) return static_cast<double>(composite(normal_density, lo, x, 0.05L));
  return static_cast<double>(1 - composite(normal_density, -40.0L, -static_cast<long double>(x), 0.05L));
}

// P(X <= a, Y <= b) for a standard bivariate normal with correlation rho,
// by a tensor-product rule over [-10, a] x [-10, b]. Narrow the panels as
// |rho| approaches one.
inline double bvn_oracle(double a, double b, double rho, long double width = 0.25L) {
  const long double r = rho;
  const long double det = 1 - r * r;
  const long double norm = 1 / (2 * 3.141592653589793238462643383279502884L * std::sqrt(det));
  const long double lo = -10;
  return static_cast<double>(composite(
      [&](long double x) {
        return composite(
            [&](long double y) { return norm * std::exp(-(x * x - 2 * r * x * y + y * y) / (2 * det)); }, lo, b, width);
      },
      lo, a, width));
}

}  // namespace beliefclt::testing
