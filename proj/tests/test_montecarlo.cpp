#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "beliefclt/montecarlo.hpp"
#include "doctest.h"
#include "random_models.hpp"

using namespace beliefclt;
using beliefclt::testing::bernoulli_type;
using beliefclt::testing::two_interval;

namespace {

SimPlan small_plan(const BeliefModel& model, std::vector<std::int64_t> n, std::int64_t reps) {
  SimPlan plan;
  plan.model = model;
  plan.n_values = std::move(n);
  plan.reps = reps;
  plan.seed = 2024;
  plan.alpha_one_sided = default_alpha_grid();
  plan.alpha_pairs = default_alpha_pairs(plan.alpha_one_sided);
  return plan;
}

// Exact event probabilities by visiting every sequence of focal indices.
std::vector<double> brute_force_events(const SimPlan& plan, const ChoquetMoments& m, std::int64_t n) {
  const auto focal = plan.model.focal();
  const std::size_t k = focal.size();
  std::vector<double> out;
  std::vector<std::size_t> seq(static_cast<std::size_t>(n), 0);
  const auto& pairs = plan.pairs_for(n);
  out.assign(2 * plan.alpha_one_sided.size() + pairs.size(), 0.0);
  for (;;) {
    double p = 1, smin = 0, smax = 0;
    for (const auto i : seq) {
      p *= focal[i].mass;
      smin += focal[i].element.min();
      smax += focal[i].element.max();
    }
    const double root = std::sqrt(static_cast<double>(n));
    const double u = (smin - n * m.lower_mean) / (root * m.lower_sd);
    const double v = (smax - n * m.upper_mean) / (root * m.upper_sd);
    std::size_t e = 0;
    for (const double a : plan.alpha_one_sided) out[e++] += u >= a ? p : 0.0;
    for (const double a : plan.alpha_one_sided) out[e++] += v < a ? p : 0.0;
    for (const auto& ap : pairs) out[e++] += (ap.lower <= u && v <= ap.upper) ? p : 0.0;

    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == k) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("streams are counter based") {
  auto a = derive_stream(7, 3, 0);
  auto b = derive_stream(7, 3, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  auto skip = derive_stream(7, 3, 0);
  skip.next_u64();
  auto direct = derive_stream(7, 3, 1);
  for (int i = 0; i < 10; ++i) CHECK(skip.next_u64() == direct.next_u64());

  auto other = derive_stream(7, 4, 0);
  auto again = derive_stream(7, 3, 0);
  CHECK(other.next_u64() != again.next_u64());
}

TEST_CASE("uniform draws look uniform") {
  auto s = derive_stream(1, 0, 0);
  const int count = 100000;
  double prev = s.next_uniform();
  double sum = 0, sum_sq = 0, lag = 0;
  for (int i = 0; i < count; ++i) {
    const double x = s.next_uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    sum += x;
    sum_sq += x * x;
    lag += (x - 0.5) * (prev - 0.5);
    prev = x;
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
  CHECK(std::abs(lag / count / var) < 0.01);
}

TEST_CASE("seeds and replications do not collide") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (std::uint64_t rep = 0; rep < 20; ++rep) seen.insert(derive_stream(seed, rep, 0).next_u64());
  }
  CHECK(seen.size() == 20000);
}

TEST_CASE("focal sampler") {
  const auto model = bernoulli_type();
  const FocalSampler sampler(model);
  CHECK(sampler.size() == 3);
  CHECK(sampler.draw(0) == 0);
  CHECK(sampler.draw(std::numeric_limits<std::uint64_t>::max()) == 2);

  std::vector<std::int64_t> counts(3, 0);
  auto stream = derive_stream(5, 0, 0);
  const std::int64_t draws = 200000;
  sampler.accumulate(draws, stream, counts);
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = model.focal()[i].mass;
    const double se = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(static_cast<double>(counts[i]) / draws - p) <= 5 * se);
  }
  const auto sums = sampler.sums(counts);
  CHECK(sums.min_sum == static_cast<double>(counts[0]));
  CHECK(sums.max_sum == static_cast<double>(counts[0] + counts[2]));
}

TEST_CASE("sample_trial") {
  const auto model = bernoulli_type();
  std::set<std::pair<double, double>> seen;
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto s = derive_stream(9, r, 0);
    const auto t = sample_trial(model, 1, s);
    seen.insert({t.min_sum, t.max_sum});
  }
  CHECK(seen == std::set<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 1}});

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto m = beliefclt::testing::random_model(rng);
    auto s = derive_stream(10, static_cast<std::uint64_t>(i), 0);
    const auto t = sample_trial(m, 50, s);
    CHECK(t.min_sum <= t.max_sum);
  }
  auto s = derive_stream(0, 0, 0);
  CHECK_THROWS_AS(sample_trial(model, 0, s), std::invalid_argument);
}

TEST_CASE("plans") {
  const auto grid = default_alpha_grid();
  const auto pairs = default_alpha_pairs(grid);
  CHECK(pairs.size() == 28);
  for (const auto& p : pairs) CHECK(p.lower <= p.upper);

  auto plan = small_plan(bernoulli_type(), {4, 16}, 10);
  CHECK_NOTHROW(validate_plan(plan));
  CHECK(plan_warnings(plan).empty());

  auto bad = plan;
  bad.reps = 0;
  CHECK_THROWS_AS(validate_plan(bad), std::invalid_argument);
  bad = plan;
  bad.n_values = {16, 4};
  CHECK_THROWS_AS(validate_plan(bad), std::invalid_argument);
  bad = plan;
  bad.n_values = {0, 4};
  CHECK_THROWS_AS(validate_plan(bad), std::invalid_argument);
  bad = plan;
  bad.alpha_pairs_by_n[5] = {{0.0, 1.0}};
  CHECK_THROWS_AS(validate_plan(bad), std::invalid_argument);

  auto reversed = plan;
  reversed.alpha_pairs.push_back({1.0, -1.0});
  CHECK(plan_warnings(reversed).size() == 1);

  auto per_n = plan;
  per_n.alpha_pairs_by_n[16] = {{-0.25, 0.25}};
  CHECK(per_n.pairs_for(16).size() == 1);
  CHECK(per_n.pairs_for(4).size() == 28);
}

TEST_CASE("event estimates") {
  const auto model = bernoulli_type();
  const auto moments = moments_by_enumeration(model);
  auto plan = small_plan(model, {1, 4, 16}, 20000);
  const auto result = estimate_events(plan, moments, 1);
  CHECK(result.seed == plan.seed);
  const std::size_t per_n = 2 * plan.alpha_one_sided.size() + plan.alpha_pairs.size();
  REQUIRE(result.events.size() == 3 * per_n);

  for (std::size_t k = 0; k < 3; ++k) {
    const auto* row = &result.events[k * per_n];
    const std::size_t a = plan.alpha_one_sided.size();
    for (std::size_t i = 0; i < a; ++i) {
      CHECK(row[i].kind == EventKind::kOneSidedLower);
      CHECK(row[a + i].kind == EventKind::kOneSidedUpper);
      CHECK(std::isinf(row[i].alpha2));
      CHECK(std::isinf(row[a + i].alpha1));
      if (i > 0) {
        // The lower event shrinks and the upper event grows with alpha.
        CHECK(row[i].count <= row[i - 1].count);
        CHECK(row[a + i].count >= row[a + i - 1].count);
      }
    }
    for (std::size_t j = 0; j < plan.alpha_pairs.size(); ++j) {
      const auto& e = row[2 * a + j];
      CHECK(e.kind == EventKind::kTwoSided);
      // Two-sided event is inside the lower event at alpha1.
      for (std::size_t i = 0; i < a; ++i) {
        if (plan.alpha_one_sided[i] == e.alpha1) CHECK(e.count <= row[i].count);
      }
    }
  }

  const EventEstimate e{16, EventKind::kTwoSided, -1, 1, 250, 1000};
  CHECK(e.frequency() == 0.25);
  CHECK(e.standard_error() == doctest::Approx(std::sqrt(0.25 * 0.75 / 1000)));
  CHECK(to_string(EventKind::kOneSidedUpper) == "one_sided_upper");
}

TEST_CASE("results do not depend on the worker count") {
  const auto model = two_interval();
  const auto moments = moments_by_enumeration(model);
  const auto plan = small_plan(model, {3, 16, 40}, 5003);
  const auto one = estimate_events(plan, moments, 1);
  CHECK(estimate_events(plan, moments, 2) == one);
  CHECK(estimate_events(plan, moments, 3) == one);
  CHECK(estimate_events(plan, moments, 8) == one);
  auto reseeded = plan;
  reseeded.seed += 1;
  CHECK_FALSE(estimate_events(reseeded, moments, 1) == one);
}

TEST_CASE("far-tail alphas") {
  const auto model = bernoulli_type();
  const auto moments = moments_by_enumeration(model);
  auto plan = small_plan(model, {16, 64}, 5000);
  plan.alpha_one_sided = {8.0};
  plan.alpha_pairs = {{-8.0, 8.0}};
  const auto r = estimate_events(plan, moments, 1);
  for (const auto& e : r.events) {
    if (e.kind == EventKind::kOneSidedLower) CHECK(e.count == 0);
    if (e.kind == EventKind::kOneSidedUpper) CHECK(e.count == e.reps);
    if (e.kind == EventKind::kTwoSided) CHECK(e.count == e.reps);
  }
}

TEST_CASE("degenerate moments are rejected") {
  const auto plan = small_plan(bernoulli_type(), {4}, 10);
  ChoquetMoments m = moments_by_enumeration(plan.model);
  m.upper_sd = 0.0;
  CHECK_THROWS_AS(estimate_events(plan, m, 1), DegenerateVariance);
  CHECK_THROWS_AS(exact_events(plan, m), DegenerateVariance);
}

TEST_CASE("exact enumeration against brute force over sequences") {
  for (const auto& model : {bernoulli_type(), two_interval()}) {
    const auto m = moments_by_enumeration(model);
    const auto plan = small_plan(model, {1, 3, 6}, 1);
    const auto exact = exact_events(plan, m);
    const std::size_t per_n = exact.size() / 3;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto brute = brute_force_events(plan, m, plan.n_values[k]);
      REQUIRE(brute.size() == per_n);
      for (std::size_t e = 0; e < per_n; ++e) {
        CHECK(std::abs(exact[k * per_n + e].probability - brute[e]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("exact enumeration at n = 1 equals belief and plausibility") {
  for (const auto& model : {bernoulli_type(), two_interval()}) {
    const auto m = moments_by_enumeration(model);
    const auto plan = small_plan(model, {1}, 1);
    const auto exact = exact_events(plan, m);
    for (const auto& e : exact) {
      double want = 0;
      switch (e.kind) {
        case EventKind::kOneSidedLower:
          want = belief(model, IntervalEvent::at_least(m.lower_mean + e.alpha1 * m.lower_sd));
          break;
        case EventKind::kOneSidedUpper:
          want = 1.0 - plausibility(model, IntervalEvent::at_least(m.upper_mean + e.alpha2 * m.upper_sd));
          break;
        case EventKind::kTwoSided:
          want = belief(model, IntervalEvent::closed(m.lower_mean + e.alpha1 * m.lower_sd,
                                                      m.upper_mean + e.alpha2 * m.upper_sd));
          break;
      }
      CHECK(std::abs(e.probability - want) <= 1e-12);
    }
  }
}

TEST_CASE("simulation agrees with exact enumeration") {
  const auto model = bernoulli_type();
  const auto m = moments_by_enumeration(model);
  const auto plan = small_plan(model, {1, 2, 5, 16}, 100000);
  const auto sim = estimate_events(plan, m, 2);
  const auto exact = exact_events(plan, m);
  REQUIRE(sim.events.size() == exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double p = exact[i].probability;
    const double se = std::sqrt(p * (1 - p) / plan.reps);
    INFO("event " << i << " n = " << exact[i].n);
    CHECK(std::abs(sim.events[i].frequency() - p) <= 5 * se + 1e-12);
  }
}

TEST_CASE("exact enumeration budget") {
  std::vector<FocalMass> focal;
  for (int i = 0; i < 12; ++i) focal.push_back({FocalElement::interval(i * 0.1, i * 0.1 + 0.05), 1.0 / 12});
  const auto model = BeliefModel::validated(2.0, focal);
  const auto plan = small_plan(model, {200}, 1);
  CHECK_THROWS_AS(exact_events(plan, moments_by_enumeration(model)), GridTooLarge);
}
