#pragma once

// Simulation of the i.i.d. product belief measure.
//
// The belief of an event about the sum X_1 + ... + X_n under the product
// measure equals the probability, under i.i.d. sampling of focal sets
// K_1, ..., K_n, that the event holds for every point of K_1 x ... x K_n.
// For the one- and two-sided sum events used here this reduces to
// conditions on S_min = sum min K_i and S_max = sum max K_i, so each trial
// only needs those two sums.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "beliefclt/belief.hpp"
#include "beliefclt/moments.hpp"

namespace beliefclt {

// Counter-based stream: the i-th output is a bijective mix of
// key + (i + 1) * golden_gamma, so any position is reachable in O(1) and a
// stream's draws depend on nothing but (key, position).
class RandomStream {
 public:
  RandomStream(std::uint64_t key, std::uint64_t position) noexcept : key_(key), position_(position) {}

  std::uint64_t next_u64() noexcept;
  // 53-bit uniform in [0, 1).
  double next_uniform() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t key_;
  std::uint64_t position_;
};

// Stream for replication `replication` positioned at coordinate
// `coordinate`: derive_stream(s, r, i + 1) yields the same draws as
// derive_stream(s, r, i) after one draw.
RandomStream derive_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t coordinate);

struct AlphaPair {
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const AlphaPair&, const AlphaPair&) = default;
};

struct SimPlan {
  BeliefModel model{1.0, {}};
  std::vector<std::int64_t> n_values;
  std::int64_t reps = 1'000'000;
  std::uint64_t seed = 0;
  std::vector<double> alpha_one_sided;
  std::vector<AlphaPair> alpha_pairs;
  // Per-n replacement for alpha_pairs.
  std::map<std::int64_t, std::vector<AlphaPair>> alpha_pairs_by_n;
  // Berry-Esseen allowance in the pass rule deviation <= 3 SE + slack / sqrt(n).
  double slack = 1.0;

  const std::vector<AlphaPair>& pairs_for(std::int64_t n) const;

  friend bool operator==(const SimPlan&, const SimPlan&) = default;
};

std::vector<std::int64_t> default_n_schedule();
std::vector<double> default_alpha_grid();
// Pairs (a1, a2) of the grid with a1 <= a2.
std::vector<AlphaPair> default_alpha_pairs(std::span<const double> grid);

// Throws std::invalid_argument for reps < 1, nonpositive or non-increasing n.
void validate_plan(const SimPlan& plan);
// Non-fatal findings, e.g. pairs with alpha1 > alpha2.
std::vector<std::string> plan_warnings(const SimPlan& plan);

struct TrialSums {
  double min_sum = 0.0;
  double max_sum = 0.0;
};

// Categorical sampler over the focal elements of a model.
class FocalSampler {
 public:
  explicit FocalSampler(const BeliefModel& model);

  std::size_t size() const noexcept { return mins_.size(); }
  std::size_t draw(std::uint64_t u) const noexcept;

  // Adds `steps` draws from the stream to the per-focal counts.
  void accumulate(std::int64_t steps, RandomStream& stream, std::span<std::int64_t> counts) const noexcept;

  // Sums of min K and max K for the given per-focal counts, in focal order.
  TrialSums sums(std::span<const std::int64_t> counts) const noexcept;

 private:
  std::vector<std::uint64_t> thresholds_;
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

// One trial of length n: draws n focal elements i.i.d. from the mass law.
TrialSums sample_trial(const BeliefModel& model, std::int64_t n, RandomStream& stream);

enum class EventKind { kOneSidedLower, kOneSidedUpper, kTwoSided };

std::string to_string(EventKind kind);

// One estimated event. The events are, with U = (S_min - n lower_mean) /
// (sqrt(n) lower_sd) and V = (S_max - n upper_mean) / (sqrt(n) upper_sd):
//   kOneSidedLower: U >= alpha1            (alpha2 = +inf)
//   kOneSidedUpper: V <  alpha2            (alpha1 = -inf)
//   kTwoSided:      alpha1 <= U and V <= alpha2
struct EventEstimate {
  std::int64_t n = 0;
  EventKind kind = EventKind::kOneSidedLower;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::int64_t count = 0;
  std::int64_t reps = 0;

  double frequency() const noexcept;
  double standard_error() const noexcept;

  friend bool operator==(const EventEstimate&, const EventEstimate&) = default;
};

struct SimResult {
  std::uint64_t seed = 0;
  std::vector<EventEstimate> events;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

// Reads BELIEFCLT_WORKERS, falling back to the number of logical cores.
unsigned default_worker_count();

// Runs plan.reps replications. Replication r walks one path of length
// max(n_values) drawn from derive_stream(seed, r, 0) and evaluates every
// event at each n. Counts are independent of the worker count.
// Throws DegenerateVariance when a standard deviation vanishes.
SimResult estimate_events(const SimPlan& plan, const ChoquetMoments& moments, unsigned workers = 0);

// Exact event probabilities under the product measure by enumerating the
// multinomial focal counts. Same event layout as estimate_events with
// count = 0 and reps = 0; use the returned probabilities instead.
struct ExactEvent {
  std::int64_t n = 0;
  EventKind kind = EventKind::kOneSidedLower;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double probability = 0.0;
};

inline constexpr std::uint64_t kExactCompositionBudget = 20'000'000;

// Throws GridTooLarge when the number of count vectors exceeds the budget.
std::vector<ExactEvent> exact_events(const SimPlan& plan, const ChoquetMoments& moments);

}  // namespace beliefclt
