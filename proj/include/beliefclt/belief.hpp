#pragma once

// Finitely supported belief measures on [-M, M].
//
// A belief measure is represented by its mass function: a finite list of
// focal elements, each a nonempty finite union of closed intervals, with
// positive masses summing to one. The belief of an event A is the total
// mass of the focal elements contained in A; the plausibility is the total
// mass of the focal elements that meet A.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "beliefclt/errors.hpp"

namespace beliefclt {

struct ClosedInterval {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

class FocalElement {
 public:
  // Stores the parts verbatim. Use canonical() to sort and merge.
  explicit FocalElement(std::vector<ClosedInterval> parts);

  static FocalElement point(double x);
  static FocalElement interval(double lo, double hi);
  static FocalElement points(std::span<const double> xs);

  // Sorts the parts and merges overlapping or touching ones.
  // Throws std::invalid_argument for an empty list or an inverted interval.
  static FocalElement canonical(std::vector<ClosedInterval> parts);

  std::span<const ClosedInterval> parts() const noexcept { return parts_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  bool is_singleton() const noexcept;

  // Nonempty, no inverted interval, sorted, pairwise disjoint.
  bool is_canonical() const noexcept;

  FocalElement shifted(double offset) const;
  // scale must be positive.
  FocalElement scaled(double scale) const;

  friend bool operator==(const FocalElement& a, const FocalElement& b) { return a.parts_ == b.parts_; }

 private:
  std::vector<ClosedInterval> parts_;
  double min_ = std::numeric_limits<double>::quiet_NaN();
  double max_ = std::numeric_limits<double>::quiet_NaN();
};

struct FocalMass {
  FocalElement element;
  double mass = 0.0;

  friend bool operator==(const FocalMass&, const FocalMass&) = default;
};

enum class ViolationCode {
  kNonPositiveBound,
  kEmptyModel,
  kNonPositiveMass,
  kMassSumViolation,
  kEmptyFocalElement,
  kInvertedInterval,
  kOverlappingParts,
  kBoundViolation,
};

std::string to_string(ViolationCode code);

struct Violation {
  static constexpr std::size_t kModelLevel = std::numeric_limits<std::size_t>::max();

  ViolationCode code;
  std::size_t focal_index = kModelLevel;
  double value = 0.0;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Tolerance on the total mass of a model.
inline constexpr double kMassSumTolerance = 1e-12;

class BeliefModel {
 public:
  // Unchecked. validate_model() reports what is wrong with it.
  BeliefModel(double bound, std::vector<FocalMass> focal);

  // Validates, then rescales the masses to sum to one unless they already do
  // up to floating-point rounding. Throws ValidationError.
  static BeliefModel validated(double bound, std::vector<FocalMass> focal);

  double bound() const noexcept { return bound_; }
  std::span<const FocalMass> focal() const noexcept { return focal_; }
  std::size_t size() const noexcept { return focal_.size(); }

  // True when every focal element is a single point (an additive model).
  bool is_additive() const noexcept;

  BeliefModel with_bound(double bound) const;

  friend bool operator==(const BeliefModel&, const BeliefModel&) = default;

 private:
  double bound_;
  std::vector<FocalMass> focal_;
};

std::vector<Violation> validate_model(const BeliefModel& model);

// ---------------------------------------------------------------------------
// Interval events

enum class EndKind : std::uint8_t { kClosed, kOpen, kInfinite };

struct Endpoint {
  double value = 0.0;
  EndKind kind = EndKind::kClosed;

  static Endpoint closed(double v) { return {v, EndKind::kClosed}; }
  static Endpoint open(double v) { return {v, EndKind::kOpen}; }
  static Endpoint infinite() { return {0.0, EndKind::kInfinite}; }

  bool is_infinite() const noexcept { return kind == EndKind::kInfinite; }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// One connected piece of an event. An infinite lower endpoint means -inf,
// an infinite upper endpoint means +inf.
struct EventInterval {
  Endpoint lo;
  Endpoint hi;

  bool is_empty() const noexcept;

  friend bool operator==(const EventInterval&, const EventInterval&) = default;
};

// A finite union of intervals of the real line in canonical form:
// nonempty pieces, sorted, pairwise disjoint and not touching.
class IntervalEvent {
 public:
  IntervalEvent() = default;

  static IntervalEvent from_intervals(std::vector<EventInterval> pieces);
  static IntervalEvent empty() { return {}; }
  static IntervalEvent everything();
  static IntervalEvent closed(double lo, double hi);
  static IntervalEvent at_least(double t);
  static IntervalEvent greater_than(double t);
  static IntervalEvent at_most(double t);
  static IntervalEvent less_than(double t);
  static IntervalEvent singleton(double t) { return closed(t, t); }

  std::span<const EventInterval> pieces() const noexcept { return pieces_; }
  bool is_empty() const noexcept { return pieces_.empty(); }

  IntervalEvent complement() const;
  IntervalEvent unite(const IntervalEvent& other) const;
  IntervalEvent intersect(const IntervalEvent& other) const;

  bool contains(double x) const noexcept;
  bool contains(const ClosedInterval& part) const noexcept;
  bool contains(const FocalElement& element) const noexcept;
  bool intersects(const ClosedInterval& part) const noexcept;
  bool intersects(const FocalElement& element) const noexcept;

  // True when every point of this event lies in other.
  bool subset_of(const IntervalEvent& other) const;

  std::string to_string() const;

  friend bool operator==(const IntervalEvent&, const IntervalEvent&) = default;

 private:
  std::vector<EventInterval> pieces_;
};

double belief(const BeliefModel& model, const IntervalEvent& event);
double plausibility(const BeliefModel& model, const IntervalEvent& event);

// ---------------------------------------------------------------------------
// Total monotonicity on a finite event algebra

// The algebra generated by a finite grid g_1 < ... < g_k: its atoms are the
// open gaps and the grid points, (-inf, g_1), {g_1}, (g_1, g_2), ..., (g_k, inf).
// Events are unions of atoms, encoded as bit masks (bit j = atom j).
class CellAlgebra {
 public:
  static constexpr std::size_t kMaxAtoms = 24;

  explicit CellAlgebra(std::vector<double> grid);

  std::size_t atom_count() const noexcept { return 2 * grid_.size() + 1; }
  std::uint64_t event_count() const noexcept { return std::uint64_t{1} << atom_count(); }
  std::span<const double> grid() const noexcept { return grid_; }

  IntervalEvent atom(std::size_t index) const;
  IntervalEvent event(std::uint64_t mask) const;

 private:
  std::vector<double> grid_;
};

using CellCapacity = std::function<double(std::uint64_t mask)>;

struct MonotonicityResult {
  bool passed = true;
  // First violating family, in enumeration order. Empty when passed.
  std::vector<std::uint64_t> witness_masks;
  std::vector<IntervalEvent> witness;
  double union_value = 0.0;
  double inclusion_exclusion = 0.0;
  std::uint64_t families_checked = 0;
};

inline constexpr std::uint64_t kDefaultFamilyBudget = 50'000'000;

// Checks nu(B_1 u ... u B_k) >= sum_{J} (-1)^{|J|+1} nu(intersection over J)
// for every family of 2..order distinct events of the algebra.
// order must be 2 or 3. Throws GridTooLarge when the number of families
// exceeds the budget.
MonotonicityResult check_total_monotonicity(const CellAlgebra& algebra, const CellCapacity& capacity,
                                            int order, std::uint64_t family_budget = kDefaultFamilyBudget);

MonotonicityResult total_monotonicity_check(const BeliefModel& model, std::vector<double> grid, int order,
                                            std::uint64_t family_budget = kDefaultFamilyBudget);

}  // namespace beliefclt
