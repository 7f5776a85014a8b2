#include "beliefclt/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beliefclt {

double std_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  if (x == INFINITY) return 1.0;
  if (x == -INFINITY) return 0.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  if (p == 0.0) return -INFINITY;
  if (p == 1.0) return INFINITY;
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Gauss-Legendre nodes (negative half) and weights for 6, 12 and 20 points,
// as tabulated in Genz's BVNU.
constexpr std::array<double, 3> kW6{0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6{-0.9324695142031522, -0.6612093864662647, -0.2386191860831970};
constexpr std::array<double, 6> kW12{0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                     0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 6> kX12{-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
                                     -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 10> kW20{0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                      0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                      0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                      0.1527533871307259};
constexpr std::array<double, 10> kX20{-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                      -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                                      -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                                      -0.07652652113349733};

struct Rule {
  const double* x;
  const double* w;
  int size;
};

Rule rule_for(double r) {
  const double ar = std::abs(r);
  if (ar < 0.3) return {kX6.data(), kW6.data(), 3};
  if (ar < 0.75) return {kX12.data(), kW12.data(), 6};
  return {kX20.data(), kW20.data(), 10};
}

// P(X > h, Y > k) for finite h, k and |r| < 1.
double upper_orthant(double h, double k, double r) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const Rule rule = rule_for(r);
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (int i = 0; i < rule.size; ++i) {
      double sn = std::sin(asr * (rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + std_normal_cdf(-h) * std_normal_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < rule.size; ++i) {
      double xs = a * (rule.x[i] + 1.0);
      xs *= xs;
      double rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs - std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (1.0 - rule.x[i]) * (1.0 - rule.x[i]) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    bvn += std_normal_cdf(-std::max(h, k));
  } else {
    bvn = -bvn + std::max(0.0, std_normal_cdf(-h) - std_normal_cdf(-k));
  }
  return bvn;
}

}  // namespace

double bvn_cdf(const BvnParams& p) {
  if (std::isnan(p.a) || std::isnan(p.b) || std::isnan(p.rho)) throw std::invalid_argument("bvn_cdf: NaN argument");
  if (std::abs(p.rho) > 1.0) throw std::invalid_argument("bvn_cdf: |rho| > 1");

  if (p.a == -INFINITY || p.b == -INFINITY) return 0.0;
  if (p.a == INFINITY) return std_normal_cdf(p.b);
  if (p.b == INFINITY) return std_normal_cdf(p.a);

  constexpr double kUnitTolerance = 1e-12;
  if (p.rho >= 1.0 - kUnitTolerance) return std_normal_cdf(std::min(p.a, p.b));
  if (p.rho <= -1.0 + kUnitTolerance) return std::max(0.0, std_normal_cdf(p.a) + std_normal_cdf(p.b) - 1.0);
  if (p.rho == 0.0) return std_normal_cdf(p.a) * std_normal_cdf(p.b);

  return std::clamp(upper_orthant(-p.a, -p.b, p.rho), 0.0, 1.0);
}

double two_sided_limit(double alpha1, double alpha2, double rho) {
  return bvn_cdf({-alpha1, alpha2, -rho});
}

}  // namespace beliefclt
