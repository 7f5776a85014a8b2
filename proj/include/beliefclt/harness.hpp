#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beliefclt/belief.hpp"
#include "beliefclt/moments.hpp"
#include "beliefclt/montecarlo.hpp"

namespace beliefclt {

struct ReportRow {
  std::string experiment;
  std::int64_t n = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double theory = 0.0;
  double empirical = 0.0;
  double deviation = 0.0;
  double se = 0.0;
  bool pass = false;
};

enum class FitStatus { kOk, kInsufficientSignal };

struct RatePoint {
  std::int64_t n = 0;
  double deviation = 0.0;
  double se = 0.0;
};

// Least-squares fit of log(deviation) = intercept + slope * log(n) over the
// points whose deviation exceeds the noise floor.
struct RateFit {
  std::vector<RatePoint> points;
  FitStatus status = FitStatus::kInsufficientSignal;
  std::size_t used_points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double k_hat = 0.0;
};

struct VerificationReport {
  std::vector<ReportRow> rows;
  RateFit rate;

  bool all_passed() const noexcept;
};

inline constexpr double kNoiseFloorMultiple = 5.0;
inline constexpr std::size_t kMinFitPoints = 3;

// 3 SE + slack / sqrt(n).
double tolerance(double se, std::int64_t n, double slack);

// Limits 1 - Phi(alpha) (lower) and Phi(alpha) (upper).
VerificationReport evaluate_one_sided(const SimResult& result, double slack);
// Limit N2(-alpha1, alpha2; -rho).
VerificationReport evaluate_two_sided(const SimResult& result, const ChoquetMoments& moments, double slack);

VerificationReport verify_one_sided(const SimPlan& plan, unsigned workers = 0);
VerificationReport verify_two_sided(const SimPlan& plan, const ChoquetMoments& moments, unsigned workers = 0);

// Per n, the largest deviation over the report rows, then fit_loglog.
RateFit fit_rate(const VerificationReport& report);
RateFit fit_loglog(std::vector<RatePoint> points, double noise_multiple = kNoiseFloorMultiple);

// m({1}) = p_low, m({0}) = 1 - p_high, m({0, 1}) = p_high - p_low, M = 1.
// Zero masses are dropped. Throws InvalidProbabilities.
BeliefModel bernoulli_model(double p_low, double p_high);
ChoquetMoments bernoulli_special_case(double p_low, double p_high);

// Deterministic checks: Bernoulli closed forms, additive degeneration and
// rho invariance under the declared bound, over a fixed set of models.
VerificationReport special_cases();

}  // namespace beliefclt
