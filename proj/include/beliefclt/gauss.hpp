#pragma once

namespace beliefclt {

/// Standard normal distribution function. +-inf map to 1 and 0.
double std_normal_cdf(double x);

double std_normal_pdf(double x);

/// Inverse of std_normal_cdf by bisection, p in [0, 1].
double std_normal_quantile(double p);

/// Upper limits and correlation of a standard bivariate normal. Limits may be
/// +-infinity.
struct BvnParams {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
};

/// P(X <= a, Y <= b) for a standard bivariate normal (X, Y) with
/// correlation rho. Absolute error below 1e-7 (in practice ~1e-15).
///
/// Uses the Drezner-Wesolowsky reduction to a one-dimensional integral over
/// the correlation, evaluated with 6, 12 or 20 point Gauss-Legendre rules as
/// |rho| grows, and the Genz asymptotic expansion for |rho| >= 0.925.
/// |rho| within 1e-12 of one is evaluated in closed form.
/// Throws std::invalid_argument when |rho| > 1 or an argument is NaN.
double bvn_cdf(const BvnParams& p);

/// P(alpha1 <= Zhat, Zhat' <= alpha2) for standard (Zhat, Zhat') with
/// correlation rho, which equals N2(-alpha1, alpha2; -rho).
double two_sided_limit(double alpha1, double alpha2, double rho);

}  // namespace beliefclt
