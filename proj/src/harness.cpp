#include "beliefclt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "beliefclt/gauss.hpp"

namespace beliefclt {

bool VerificationReport::all_passed() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

double tolerance(double se, std::int64_t n, double slack) {
  return 3.0 * se + slack / std::sqrt(static_cast<double>(n));
}

namespace {

ReportRow compare(std::string experiment, const EventEstimate& e, double theory, double slack) {
  ReportRow row;
  row.experiment = std::move(experiment);
  row.n = e.n;
  row.alpha1 = e.alpha1;
  row.alpha2 = e.alpha2;
  row.theory = theory;
  row.empirical = e.frequency();
  row.deviation = std::abs(row.empirical - theory);
  row.se = e.standard_error();
  row.pass = row.deviation <= tolerance(row.se, e.n, slack);
  return row;
}

}  // namespace

VerificationReport evaluate_one_sided(const SimResult& result, double slack) {
  VerificationReport report;
  for (const auto& e : result.events) {
    if (e.kind == EventKind::kOneSidedLower) {
      report.rows.push_back(compare(to_string(e.kind), e, 1.0 - std_normal_cdf(e.alpha1), slack));
    } else if (e.kind == EventKind::kOneSidedUpper) {
      report.rows.push_back(compare(to_string(e.kind), e, std_normal_cdf(e.alpha2), slack));
    }
  }
  report.rate = fit_rate(report);
  return report;
}

VerificationReport evaluate_two_sided(const SimResult& result, const ChoquetMoments& moments, double slack) {
  VerificationReport report;
  for (const auto& e : result.events) {
    if (e.kind != EventKind::kTwoSided) continue;
    report.rows.push_back(compare(to_string(e.kind), e, two_sided_limit(e.alpha1, e.alpha2, moments.rho), slack));
  }
  report.rate = fit_rate(report);
  return report;
}

VerificationReport verify_one_sided(const SimPlan& plan, unsigned workers) {
  const auto moments = moments_by_enumeration(plan.model);
  SimPlan one_sided = plan;
  one_sided.alpha_pairs.clear();
  one_sided.alpha_pairs_by_n.clear();
  return evaluate_one_sided(estimate_events(one_sided, moments, workers), plan.slack);
}

VerificationReport verify_two_sided(const SimPlan& plan, const ChoquetMoments& moments, unsigned workers) {
  SimPlan two_sided = plan;
  two_sided.alpha_one_sided.clear();
  return evaluate_two_sided(estimate_events(two_sided, moments, workers), moments, plan.slack);
}

RateFit fit_rate(const VerificationReport& report) {
  // Largest deviation per n, with the standard error of the row attaining it.
  std::map<std::int64_t, RatePoint> worst;
  for (const auto& row : report.rows) {
    if (row.n <= 0) continue;
    auto [it, inserted] = worst.try_emplace(row.n, RatePoint{row.n, row.deviation, row.se});
    if (!inserted && row.deviation > it->second.deviation) it->second = {row.n, row.deviation, row.se};
  }
  std::vector<RatePoint> points;
  for (const auto& [n, p] : worst) points.push_back(p);
  return fit_loglog(std::move(points));
}

RateFit fit_loglog(std::vector<RatePoint> points, double noise_multiple) {
  RateFit fit;
  fit.points = std::move(points);
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : fit.points) {
    if (!(p.n > 0 && p.deviation > 0.0 && p.deviation > noise_multiple * p.se)) continue;
    xy.emplace_back(std::log(static_cast<double>(p.n)), std::log(p.deviation));
  }
  fit.used_points = xy.size();
  if (xy.size() < kMinFitPoints) return fit;

  // Centered sums, so that repeated n give sxx == 0 exactly.
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.k_hat = std::exp(fit.intercept);
  fit.status = FitStatus::kOk;
  return fit;
}

BeliefModel bernoulli_model(double p_low, double p_high) {
  if (!(0.0 <= p_low && p_low <= p_high && p_high <= 1.0)) {
    throw InvalidProbabilities("need 0 <= p_low <= p_high <= 1, got p_low = " + std::to_string(p_low) +
                               ", p_high = " + std::to_string(p_high));
  }
  std::vector<FocalMass> focal;
  if (p_low > 0.0) focal.push_back({FocalElement::point(1.0), p_low});
  if (p_high < 1.0) focal.push_back({FocalElement::point(0.0), 1.0 - p_high});
  if (p_high > p_low) focal.push_back({FocalElement({{0.0, 0.0}, {1.0, 1.0}}), p_high - p_low});
  return BeliefModel::validated(1.0, std::move(focal));
}

ChoquetMoments bernoulli_special_case(double p_low, double p_high) {
  return moments_by_enumeration(bernoulli_model(p_low, p_high));
}

namespace {

ReportRow exact_row(std::string experiment, double theory, double computed, double tol) {
  ReportRow row;
  row.experiment = std::move(experiment);
  row.alpha1 = NAN;
  row.alpha2 = NAN;
  row.theory = theory;
  row.empirical = computed;
  row.deviation = std::abs(computed - theory);
  row.pass = row.deviation <= tol;
  return row;
}

struct NamedModel {
  std::string name;
  BeliefModel model;
};

std::vector<NamedModel> reference_models() {
  std::vector<NamedModel> out;
  out.push_back({"bernoulli_0.3_0.7", bernoulli_model(0.3, 0.7)});
  out.push_back({"two_interval", BeliefModel::validated(3.0, {{FocalElement::interval(0.0, 1.0), 0.5},
                                                             {FocalElement::interval(1.0, 3.0), 0.5}})});
  out.push_back({"coin_pm1", BeliefModel::validated(1.0, {{FocalElement::point(-1.0), 0.5},
                                                         {FocalElement::point(1.0), 0.5}})});
  out.push_back({"die_additive", BeliefModel::validated(6.0, {{FocalElement::point(1.0), 1.0 / 6},
                                                             {FocalElement::point(2.0), 1.0 / 6},
                                                             {FocalElement::point(3.0), 1.0 / 6},
                                                             {FocalElement::point(4.0), 1.0 / 6},
                                                             {FocalElement::point(5.0), 1.0 / 6},
                                                             {FocalElement::point(6.0), 1.0 / 6}})});
  out.push_back({"mixed_unions",
                 BeliefModel::validated(2.0, {{FocalElement::canonical({{-2.0, -1.5}, {0.5, 1.0}}), 0.25},
                                              {FocalElement::interval(-0.5, 0.25), 0.35},
                                              {FocalElement::point(1.5), 0.15},
                                              {FocalElement::canonical({{-1.0, -1.0}, {0.0, 0.5}, {1.75, 2.0}}), 0.25}})});
  return out;
}

}  // namespace

VerificationReport special_cases() {
  VerificationReport report;
  constexpr double kExact = 1e-12;

  const auto bern = bernoulli_special_case(0.3, 0.7);
  report.rows.push_back(exact_row("bernoulli_lower_mean", 0.3, bern.lower_mean, kExact));
  report.rows.push_back(exact_row("bernoulli_upper_mean", 0.7, bern.upper_mean, kExact));
  report.rows.push_back(exact_row("bernoulli_lower_var", 0.21, bern.lower_sd * bern.lower_sd, kExact));
  report.rows.push_back(exact_row("bernoulli_upper_var", 0.21, bern.upper_sd * bern.upper_sd, kExact));
  report.rows.push_back(exact_row("bernoulli_rho", 3.0 / 7.0, bern.rho, kExact));

  const auto coin = bernoulli_special_case(0.5, 0.5);
  report.rows.push_back(exact_row("bernoulli_additive_rho", 1.0, coin.rho, kExact));

  for (const auto& [name, model] : reference_models()) {
    const auto rho = rho_M_invariance(model, model.bound() + 1.0);
    report.rows.push_back(exact_row("m_invariance_" + name, rho.rho_at_bound, rho.rho_at_enlarged, 1e-10));

    if (!model.is_additive()) continue;
    const auto m = moments_by_enumeration(model);
    report.rows.push_back(exact_row("additive_means_" + name, m.lower_mean, m.upper_mean, kExact));
    report.rows.push_back(exact_row("additive_sds_" + name, m.lower_sd, m.upper_sd, kExact));
    report.rows.push_back(exact_row("additive_rho_" + name, 1.0, m.rho, kExact));
    const auto grid = default_alpha_grid();
    for (const auto& pair : default_alpha_pairs(grid)) {
      auto row = exact_row("additive_two_sided_" + name,
                           std_normal_cdf(pair.upper) - std_normal_cdf(pair.lower),
                           two_sided_limit(pair.lower, pair.upper, m.rho), 1e-7);
      row.alpha1 = pair.lower;
      row.alpha2 = pair.upper;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace beliefclt
