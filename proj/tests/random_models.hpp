#pragma once

// Seeded generators for property tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "beliefclt/belief.hpp"

namespace beliefclt::testing {

struct ModelShape {
  std::size_t max_focal = 8;
  std::size_t max_parts = 3;
  double bound = 3.0;
  // Endpoints snap to multiples of this (0 = continuous), which produces
  // shared endpoints between focal elements and events.
  double lattice = 0.25;
};

inline double draw_endpoint(std::mt19937_64& rng, const ModelShape& shape) {
  std::uniform_real_distribution<double> u(-shape.bound, shape.bound);
  double x = u(rng);
  if (shape.lattice > 0.0) x = std::clamp(std::round(x / shape.lattice) * shape.lattice, -shape.bound, shape.bound);
  return x;
}

inline FocalElement random_focal(std::mt19937_64& rng, const ModelShape& shape) {
  std::uniform_int_distribution<std::size_t> parts_dist(1, shape.max_parts);
  std::bernoulli_distribution degenerate(0.3);
  std::vector<ClosedInterval> parts;
  const std::size_t count = parts_dist(rng);
  for (std::size_t i = 0; i < count; ++i) {
    double a = draw_endpoint(rng, shape);
    double b = degenerate(rng) ? a : draw_endpoint(rng, shape);
    if (a > b) std::swap(a, b);
    parts.push_back({a, b});
  }
  return FocalElement::canonical(std::move(parts));
}

// A valid model whose lower and upper spreads are comfortably nonzero.
inline BeliefModel random_model(std::mt19937_64& rng, const ModelShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> size_dist(2, std::max<std::size_t>(2, shape.max_focal));
  std::exponential_distribution<double> weight(1.0);
  for (;;) {
    const std::size_t k = size_dist(rng);
    std::vector<FocalMass> focal;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double w = 0.05 + weight(rng);
      focal.push_back({random_focal(rng, shape), w});
      total += w;
    }
    for (auto& f : focal) f.mass /= total;
    BeliefModel model = BeliefModel::validated(shape.bound, std::move(focal));

    double lo_mean = 0, hi_mean = 0, lo_var = 0, hi_var = 0;
    for (const auto& f : model.focal()) {
      lo_mean += f.mass * f.element.min();
      hi_mean += f.mass * f.element.max();
    }
    for (const auto& f : model.focal()) {
      lo_var += f.mass * std::pow(f.element.min() - lo_mean, 2);
      hi_var += f.mass * std::pow(f.element.max() - hi_mean, 2);
    }
    if (lo_var > 1e-2 && hi_var > 1e-2) return model;
  }
}

inline Endpoint random_endpoint(std::mt19937_64& rng, double bound) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> step(-static_cast<int>(bound * 4) - 2, static_cast<int>(bound * 4) + 2);
  const int k = kind(rng);
  if (k == 0) return Endpoint::infinite();
  const double v = 0.25 * step(rng);
  return k <= 2 ? Endpoint::closed(v) : Endpoint::open(v);
}

inline IntervalEvent random_event(std::mt19937_64& rng, double bound) {
  std::uniform_int_distribution<int> count(0, 3);
  std::vector<EventInterval> pieces;
  const int c = count(rng);
  for (int i = 0; i < c; ++i) pieces.push_back({random_endpoint(rng, bound), random_endpoint(rng, bound)});
  return IntervalEvent::from_intervals(std::move(pieces));
}

inline BeliefModel bernoulli_type() {
  return BeliefModel::validated(1.0, {{FocalElement::point(1.0), 0.3},
                                      {FocalElement::point(0.0), 0.3},
                                      {FocalElement({{0.0, 0.0}, {1.0, 1.0}}), 0.4}});
}

inline BeliefModel two_interval() {
  return BeliefModel::validated(3.0, {{FocalElement::interval(0.0, 1.0), 0.5}, {FocalElement::interval(1.0, 3.0), 0.5}});
}

inline BeliefModel coin() {
  return BeliefModel::validated(1.0, {{FocalElement::point(-1.0), 0.5}, {FocalElement::point(1.0), 0.5}});
}

}  // namespace beliefclt::testing
