#pragma once

#include "beliefclt/belief.hpp"

namespace beliefclt {

// Limit parameters of the lower and upper central limit theorems.
//
// With Z = min K and Zbar = max K for a focal set K drawn from the mass
// function: lower_mean = E[Z], upper_mean = E[Zbar], lower_sd and upper_sd
// their standard deviations, cross_moment = E[Z Zbar],
// rho_prime = M^2 - M upper_mean + M lower_mean - cross_moment and
// rho = corr(Z, Zbar).
struct ChoquetMoments {
  double lower_mean = 0.0;
  double upper_mean = 0.0;
  double lower_sd = 0.0;
  double upper_sd = 0.0;
  double cross_moment = 0.0;
  double rho_prime = 0.0;
  double rho = 0.0;
};

// Standard deviations below this are treated as zero.
inline constexpr double kDegenerateSd = 1e-12;

enum class OnDegenerate {
  kThrow,
  // Return the means, spreads and cross terms anyway, with rho = NaN.
  kReportNaN,
};

// Direct sums over the focal elements. Throws DegenerateVariance.
ChoquetMoments moments_by_enumeration(const BeliefModel& model, OnDegenerate policy = OnDegenerate::kThrow);

enum class QuadratureMethod {
  // Integrands are step functions with jumps at focal endpoints; summing
  // over the pieces is exact.
  kPiecewiseExact,
  // Adaptive Simpson that knows nothing about the breakpoints. Slow; used to
  // cross-check the piecewise route.
  kAdaptive,
};

// Survival-function route: integrates t -> nu(X >= t) and t -> V(X >= t)
// and the double integral of nu([t1, t2]) over t1 <= t2.
// quad_tol only affects QuadratureMethod::kAdaptive. Throws DegenerateVariance.
ChoquetMoments moments_by_integration(const BeliefModel& model, double quad_tol = 1e-10,
                                      QuadratureMethod method = QuadratureMethod::kPiecewiseExact,
                                      OnDegenerate policy = OnDegenerate::kThrow);

// nu(X >= t) and V(X >= t).
double lower_survival(const BeliefModel& model, double t);
double upper_survival(const BeliefModel& model, double t);

struct RhoAtBounds {
  double rho_at_bound = 0.0;
  double rho_at_enlarged = 0.0;
};

// rho = (M^2 - M upper_mean + M lower_mean - rho' - lower_mean upper_mean) /
// (lower_sd upper_sd), with rho' integrated at the declared bound and again
// with the bound replaced by enlarged_bound (> model.bound()). rho' moves
// with the bound; rho must not.
RhoAtBounds rho_M_invariance(const BeliefModel& model, double enlarged_bound);

// Largest absolute difference over all seven fields; a NaN on one side only
// counts as infinite.
double max_field_delta(const ChoquetMoments& a, const ChoquetMoments& b);

}  // namespace beliefclt
