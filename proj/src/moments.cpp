#include "beliefclt/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace beliefclt {

namespace {

// False when degenerate and the policy allows it.
bool require_spread(double lower_sd, double upper_sd, OnDegenerate policy) {
  if (!(lower_sd >= kDegenerateSd) || !(upper_sd >= kDegenerateSd)) {
    if (policy == OnDegenerate::kReportNaN) return false;
    throw DegenerateVariance("degenerate variance: lower sd " + std::to_string(lower_sd) + ", upper sd " +
                             std::to_string(upper_sd));
  }
  return true;
}

double correlation(double cross_moment, double lower_mean, double upper_mean, double lower_sd, double upper_sd) {
  const double rho = (cross_moment - lower_mean * upper_mean) / (lower_sd * upper_sd);
  return std::clamp(rho, -1.0, 1.0);
}

void require_model(const BeliefModel& model) {
  if (model.size() == 0) throw std::invalid_argument("model has no focal elements");
  if (!(model.bound() > 0.0)) throw std::invalid_argument("model bound must be positive");
}

// Sorted, deduplicated breakpoints inside [lo, hi], including both ends.
std::vector<double> breakpoints(std::vector<double> pts, double lo, double hi) {
  std::erase_if(pts, [&](double x) { return !(x > lo && x < hi); });
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

struct SurvivalIntegrals {
  double mean = 0.0;
  double variance = 0.0;
};

// s(t) = P(X >= t) for X supported in [lo, hi], a step function with jumps
// only at the given breakpoints; its value on each open piece is read at the
// midpoint. E[X] = lo + int_lo^hi s, and the variance is taken about the
// mean, Var X = int 2 (t - mean) (s(t) - 1{t <= mean}) dt, so that rounding
// scales with the spread of X rather than with its location.
SurvivalIntegrals integrate_steps(const std::function<double(double)>& s, std::vector<double> jumps, double lo,
                                  double hi) {
  SurvivalIntegrals out;
  const auto grid = breakpoints(jumps, lo, hi);
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) area += s(0.5 * (grid[i] + grid[i + 1])) * (grid[i + 1] - grid[i]);
  out.mean = std::clamp(lo + area, lo, hi);

  jumps.push_back(out.mean);
  const auto fine = breakpoints(std::move(jumps), lo, hi);
  for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
    const double u = fine[i];
    const double v = fine[i + 1];
    const double mid = 0.5 * (u + v);
    const double f = s(mid) - (mid <= out.mean ? 1.0 : 0.0);
    out.variance += f * ((v - out.mean) * (v - out.mean) - (u - out.mean) * (u - out.mean));
  }
  out.variance = std::max(0.0, out.variance);
  return out;
}

// Adaptive Simpson with an absolute tolerance. Step integrands never meet
// the Richardson criterion across a jump, so panels narrower than
// min_width are accepted as they are.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, double min_width) {
  struct Panel {
    double a, b, fa, fm, fb, whole, tol;
  };
  auto simpson = [](double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); };

  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  std::vector<Panel> stack{{a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol}};
  double total = 0.0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double flm = f(0.5 * (p.a + m));
    const double frm = f(0.5 * (m + p.b));
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol || p.b - p.a <= min_width) {
      total += left + right + delta / 15.0;
    } else {
      stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol});
      stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol});
    }
  }
  return total;
}

ChoquetMoments assemble(double m, double lower_mean, double upper_mean, double lower_second, double upper_second,
                        double rho_prime, OnDegenerate policy) {
  ChoquetMoments out;
  out.lower_mean = lower_mean;
  out.upper_mean = upper_mean;
  out.lower_sd = std::sqrt(std::max(0.0, lower_second - lower_mean * lower_mean));
  out.upper_sd = std::sqrt(std::max(0.0, upper_second - upper_mean * upper_mean));
  out.rho_prime = rho_prime;
  out.cross_moment = m * m - m * upper_mean + m * lower_mean - rho_prime;
  if (!require_spread(out.lower_sd, out.upper_sd, policy)) {
    out.rho = NAN;
    return out;
  }
  out.rho = correlation(out.cross_moment, out.lower_mean, out.upper_mean, out.lower_sd, out.upper_sd);
  return out;
}

}  // namespace

ChoquetMoments moments_by_enumeration(const BeliefModel& model, OnDegenerate policy) {
  require_model(model);
  const double m = model.bound();

  ChoquetMoments out;
  for (const auto& f : model.focal()) {
    out.lower_mean += f.mass * f.element.min();
    out.upper_mean += f.mass * f.element.max();
  }
  double lower_var = 0.0;
  double upper_var = 0.0;
  double covariance = 0.0;
  for (const auto& f : model.focal()) {
    const double dz = f.element.min() - out.lower_mean;
    const double dzbar = f.element.max() - out.upper_mean;
    lower_var += f.mass * dz * dz;
    upper_var += f.mass * dzbar * dzbar;
    covariance += f.mass * dz * dzbar;
  }
  out.lower_sd = std::sqrt(lower_var);
  out.upper_sd = std::sqrt(upper_var);
  out.cross_moment = covariance + out.lower_mean * out.upper_mean;
  out.rho_prime = m * m - m * out.upper_mean + m * out.lower_mean - out.cross_moment;
  if (!require_spread(out.lower_sd, out.upper_sd, policy)) {
    out.rho = NAN;
    return out;
  }
  out.rho = std::clamp(covariance / (out.lower_sd * out.upper_sd), -1.0, 1.0);
  return out;
}

double lower_survival(const BeliefModel& model, double t) { return belief(model, IntervalEvent::at_least(t)); }

double upper_survival(const BeliefModel& model, double t) { return plausibility(model, IntervalEvent::at_least(t)); }

ChoquetMoments moments_by_integration(const BeliefModel& model, double quad_tol, QuadratureMethod method,
                                      OnDegenerate policy) {
  require_model(model);
  if (!(quad_tol > 0.0)) throw std::invalid_argument("quad_tol must be positive");
  const double m = model.bound();

  auto lower = [&](double t) { return lower_survival(model, t); };
  auto upper = [&](double t) { return upper_survival(model, t); };
  // nu([t1, t2]) over the triangle -M <= t1 <= t2 <= M.
  auto interval_belief = [&](double t1, double t2) { return belief(model, IntervalEvent::closed(t1, t2)); };

  if (method == QuadratureMethod::kAdaptive) {
    const double min_width = quad_tol * 1e-2;
    auto mean_of = [&](const std::function<double(double)>& s) {
      return adaptive_simpson(s, 0.0, m, quad_tol, min_width) +
             adaptive_simpson([&](double t) { return s(t) - 1.0; }, -m, 0.0, quad_tol, min_width);
    };
    auto second_of = [&](const std::function<double(double)>& s) {
      return adaptive_simpson([&](double t) { return 2.0 * t * s(t); }, 0.0, m, quad_tol, min_width) +
             adaptive_simpson([&](double t) { return 2.0 * t * (s(t) - 1.0); }, -m, 0.0, quad_tol, min_width);
    };
    const double rho_prime = adaptive_simpson(
        [&](double t2) {
          if (t2 <= -m) return 0.0;
          return adaptive_simpson([&](double t1) { return interval_belief(t1, t2); }, -m, t2, quad_tol, min_width);
        },
        -m, m, quad_tol, min_width);
    return assemble(m, mean_of(lower), mean_of(upper), second_of(lower), second_of(upper), rho_prime, policy);
  }

  std::vector<double> mins;
  std::vector<double> maxs;
  for (const auto& f : model.focal()) {
    mins.push_back(f.element.min());
    maxs.push_back(f.element.max());
  }
  // Support box: Z >= lo and Zbar <= hi for every focal element.
  const double lo = *std::min_element(mins.begin(), mins.end());
  const double hi = *std::max_element(maxs.begin(), maxs.end());
  const auto low = integrate_steps(lower, mins, lo, hi);
  const auto up = integrate_steps(upper, maxs, lo, hi);

  // (t1, t2) -> nu([t1, t2]) is constant on the open cells of the product of
  // the breakpoint grid with itself; cells on the diagonal contribute their
  // upper-left triangle. rho' is the integral over the whole triangle
  // -M <= t1 <= t2 <= M. The part inside the support box equals
  // E[(Z - lo)(hi - Zbar)] and gives the covariance without the M^2-sized
  // cancellation of the rho' formula.
  std::vector<double> both = mins;
  both.insert(both.end(), maxs.begin(), maxs.end());
  const auto grid = breakpoints(std::move(both), -m, m);
  double rho_prime = 0.0;
  double box = 0.0;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double h2 = grid[j + 1] - grid[j];
    const double mid2 = 0.5 * (grid[j] + grid[j + 1]);
    const bool in_box2 = grid[j + 1] <= hi;
    for (std::size_t i = 0; i < j; ++i) {
      const double cell = interval_belief(0.5 * (grid[i] + grid[i + 1]), mid2) * (grid[i + 1] - grid[i]) * h2;
      rho_prime += cell;
      if (in_box2 && grid[i] >= lo) box += cell;
    }
    const double diagonal = interval_belief(grid[j] + h2 / 3.0, grid[j] + 2.0 * h2 / 3.0) * 0.5 * h2 * h2;
    rho_prime += diagonal;
    if (in_box2 && grid[j] >= lo) box += diagonal;
  }

  ChoquetMoments out;
  out.lower_mean = low.mean;
  out.upper_mean = up.mean;
  out.lower_sd = std::sqrt(low.variance);
  out.upper_sd = std::sqrt(up.variance);
  out.rho_prime = rho_prime;
  const double covariance = (low.mean - lo) * (hi - up.mean) - box;
  out.cross_moment = covariance + low.mean * up.mean;
  if (!require_spread(out.lower_sd, out.upper_sd, policy)) {
    out.rho = NAN;
    return out;
  }
  out.rho = std::clamp(covariance / (out.lower_sd * out.upper_sd), -1.0, 1.0);
  return out;
}

RhoAtBounds rho_M_invariance(const BeliefModel& model, double enlarged_bound) {
  if (!(enlarged_bound > model.bound())) throw std::invalid_argument("enlarged bound must exceed the model bound");
  RhoAtBounds out;
  // rho from the rho' formula itself, so that both values pass through the
  // M-dependent quantities.
  auto rho_at = [](const BeliefModel& at) {
    const auto q = moments_by_integration(at);
    const double mb = at.bound();
    const double cross = mb * mb - mb * q.upper_mean + mb * q.lower_mean - q.rho_prime;
    return correlation(cross, q.lower_mean, q.upper_mean, q.lower_sd, q.upper_sd);
  };
  out.rho_at_bound = rho_at(model);
  out.rho_at_enlarged = rho_at(model.with_bound(enlarged_bound));
  return out;
}

double max_field_delta(const ChoquetMoments& a, const ChoquetMoments& b) {
  // Two NaNs (an undefined rho on both sides) agree; one NaN does not.
  auto d = [](double x, double y) {
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y) ? 0.0 : INFINITY;
    return std::abs(x - y);
  };
  return std::max({d(a.lower_mean, b.lower_mean), d(a.upper_mean, b.upper_mean), d(a.lower_sd, b.lower_sd),
                   d(a.upper_sd, b.upper_sd), d(a.cross_moment, b.cross_moment), d(a.rho_prime, b.rho_prime),
                   d(a.rho, b.rho)});
}

}  // namespace beliefclt
