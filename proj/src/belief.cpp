#include "beliefclt/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beliefclt {

// ---------------------------------------------------------------------------
// FocalElement

FocalElement::FocalElement(std::vector<ClosedInterval> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    min_ = std::isnan(min_) ? p.lo : std::min(min_, p.lo);
    max_ = std::isnan(max_) ? p.hi : std::max(max_, p.hi);
  }
}

FocalElement FocalElement::point(double x) { return FocalElement({{x, x}}); }

FocalElement FocalElement::interval(double lo, double hi) { return canonical({{lo, hi}}); }

FocalElement FocalElement::points(std::span<const double> xs) {
  std::vector<ClosedInterval> parts;
  parts.reserve(xs.size());
  for (double x : xs) parts.push_back({x, x});
  return canonical(std::move(parts));
}

FocalElement FocalElement::canonical(std::vector<ClosedInterval> parts) {
  if (parts.empty()) throw std::invalid_argument("focal element has no parts");
  for (const auto& p : parts) {
    if (!(p.lo <= p.hi)) throw std::invalid_argument("focal element has an inverted or NaN interval");
  }
  std::sort(parts.begin(), parts.end(), [](const ClosedInterval& a, const ClosedInterval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<ClosedInterval> merged;
  merged.reserve(parts.size());
  for (const auto& p : parts) {
    if (!merged.empty() && p.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, p.hi);
    } else {
      merged.push_back(p);
    }
  }
  return FocalElement(std::move(merged));
}

bool FocalElement::is_singleton() const noexcept {
  return !parts_.empty() && min_ == max_;
}

bool FocalElement::is_canonical() const noexcept {
  if (parts_.empty()) return false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (!(parts_[i].lo <= parts_[i].hi)) return false;
    if (i > 0 && !(parts_[i - 1].hi < parts_[i].lo)) return false;
  }
  return true;
}

FocalElement FocalElement::shifted(double offset) const {
  auto parts = parts_;
  for (auto& p : parts) {
    p.lo += offset;
    p.hi += offset;
  }
  return FocalElement(std::move(parts));
}

FocalElement FocalElement::scaled(double scale) const {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  auto parts = parts_;
  for (auto& p : parts) {
    p.lo *= scale;
    p.hi *= scale;
  }
  return FocalElement(std::move(parts));
}

// ---------------------------------------------------------------------------
// BeliefModel

std::string to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kNonPositiveBound: return "NonPositiveBound";
    case ViolationCode::kEmptyModel: return "EmptyModel";
    case ViolationCode::kNonPositiveMass: return "NonPositiveMass";
    case ViolationCode::kMassSumViolation: return "MassSumViolation";
    case ViolationCode::kEmptyFocalElement: return "EmptyFocalElement";
    case ViolationCode::kInvertedInterval: return "InvertedInterval";
    case ViolationCode::kOverlappingParts: return "OverlappingParts";
    case ViolationCode::kBoundViolation: return "BoundViolation";
  }
  return "Unknown";
}

namespace {

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream out;
  out << "invalid belief model:";
  for (const auto& v : violations) {
    out << ' ' << to_string(v.code);
    if (v.focal_index != Violation::kModelLevel) out << "[focal " << v.focal_index << ']';
    out << " (" << v.message << ')';
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

BeliefModel::BeliefModel(double bound, std::vector<FocalMass> focal) : bound_(bound), focal_(std::move(focal)) {}

BeliefModel BeliefModel::validated(double bound, std::vector<FocalMass> focal) {
  BeliefModel model(bound, std::move(focal));
  auto violations = validate_model(model);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  // Rescale only when the sum is off by more than rounding, so that a model
  // that was already normalized is left bit-for-bit unchanged.
  double sum = 0.0;
  for (const auto& f : model.focal_) sum += f.mass;
  const double rounding = 4.0 * static_cast<double>(model.focal_.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > rounding) {
    for (auto& f : model.focal_) f.mass /= sum;
  }
  return model;
}

bool BeliefModel::is_additive() const noexcept {
  return std::all_of(focal_.begin(), focal_.end(), [](const FocalMass& f) { return f.element.is_singleton(); });
}

BeliefModel BeliefModel::with_bound(double bound) const { return BeliefModel(bound, focal_); }

std::vector<Violation> validate_model(const BeliefModel& model) {
  std::vector<Violation> out;
  const double m = model.bound();
  if (!(m > 0.0) || !std::isfinite(m)) {
    out.push_back({ViolationCode::kNonPositiveBound, Violation::kModelLevel, m, "bound M must be positive and finite"});
  }
  if (model.size() == 0) {
    out.push_back({ViolationCode::kEmptyModel, Violation::kModelLevel, 0.0, "no focal elements"});
    return out;
  }

  double sum = 0.0;
  const auto focal = model.focal();
  for (std::size_t i = 0; i < focal.size(); ++i) {
    const auto& f = focal[i];
    sum += f.mass;
    if (!(f.mass > 0.0)) {
      out.push_back({ViolationCode::kNonPositiveMass, i, f.mass, "mass must be positive"});
    }
    const auto parts = f.element.parts();
    if (parts.empty()) {
      out.push_back({ViolationCode::kEmptyFocalElement, i, 0.0, "focal element is empty"});
      continue;
    }
    bool inverted = false;
    for (const auto& p : parts) {
      if (!(p.lo <= p.hi)) {
        out.push_back({ViolationCode::kInvertedInterval, i, p.lo, "interval has lo > hi"});
        inverted = true;
      }
    }
    if (!inverted) {
      for (std::size_t j = 1; j < parts.size(); ++j) {
        if (!(parts[j - 1].hi < parts[j].lo)) {
          out.push_back({ViolationCode::kOverlappingParts, i, parts[j].lo, "parts not sorted and disjoint"});
          break;
        }
      }
    }
    if (std::isfinite(m) && !(f.element.min() >= -m && f.element.max() <= m)) {
      const double worst = std::max(-f.element.min(), f.element.max());
      out.push_back({ViolationCode::kBoundViolation, i, worst, "focal element leaves [-M, M]"});
    }
  }
  if (!(std::abs(sum - 1.0) <= kMassSumTolerance)) {
    out.push_back({ViolationCode::kMassSumViolation, Violation::kModelLevel, sum, "masses must sum to 1"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Endpoint comparisons

namespace {

// Orders lower endpoints by the infimum of the set they start: -inf first,
// then by value, closed before open at equal value.
bool lower_less(const Endpoint& a, const Endpoint& b) {
  if (a.is_infinite() != b.is_infinite()) return a.is_infinite();
  if (a.is_infinite()) return false;
  if (a.value != b.value) return a.value < b.value;
  return a.kind == EndKind::kClosed && b.kind == EndKind::kOpen;
}

// Orders upper endpoints: +inf last, then by value, open before closed.
bool upper_less(const Endpoint& a, const Endpoint& b) {
  if (a.is_infinite() != b.is_infinite()) return b.is_infinite();
  if (a.is_infinite()) return false;
  if (a.value != b.value) return a.value < b.value;
  return a.kind == EndKind::kOpen && b.kind == EndKind::kClosed;
}

// x lies above the lower endpoint.
bool above(const Endpoint& lo, double x) {
  if (lo.is_infinite()) return true;
  return x > lo.value || (x == lo.value && lo.kind == EndKind::kClosed);
}

// x lies below the upper endpoint.
bool below(const Endpoint& hi, double x) {
  if (hi.is_infinite()) return true;
  return x < hi.value || (x == hi.value && hi.kind == EndKind::kClosed);
}

// The union of an interval ending at `hi` and one starting at `lo`
// (lo not below the first one's start) is connected.
bool joins(const Endpoint& hi, const Endpoint& lo) {
  if (hi.is_infinite() || lo.is_infinite()) return true;
  if (lo.value < hi.value) return true;
  return lo.value == hi.value && (lo.kind == EndKind::kClosed || hi.kind == EndKind::kClosed);
}

Endpoint flipped(const Endpoint& e) {
  return {e.value, e.kind == EndKind::kClosed ? EndKind::kOpen : EndKind::kClosed};
}

std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

bool EventInterval::is_empty() const noexcept {
  if (lo.is_infinite() || hi.is_infinite()) return false;
  if (lo.value < hi.value) return false;
  if (lo.value > hi.value) return true;
  return !(lo.kind == EndKind::kClosed && hi.kind == EndKind::kClosed);
}

// ---------------------------------------------------------------------------
// IntervalEvent

IntervalEvent IntervalEvent::from_intervals(std::vector<EventInterval> pieces) {
  for (const auto& p : pieces) {
    if ((!p.lo.is_infinite() && std::isnan(p.lo.value)) || (!p.hi.is_infinite() && std::isnan(p.hi.value))) {
      throw std::invalid_argument("event endpoint is NaN");
    }
  }
  std::erase_if(pieces, [](const EventInterval& p) { return p.is_empty(); });
  std::sort(pieces.begin(), pieces.end(),
            [](const EventInterval& a, const EventInterval& b) { return lower_less(a.lo, b.lo); });
  IntervalEvent event;
  for (const auto& p : pieces) {
    if (!event.pieces_.empty() && joins(event.pieces_.back().hi, p.lo)) {
      auto& last = event.pieces_.back();
      if (upper_less(last.hi, p.hi)) last.hi = p.hi;
    } else {
      event.pieces_.push_back(p);
    }
  }
  return event;
}

IntervalEvent IntervalEvent::everything() {
  return from_intervals({{Endpoint::infinite(), Endpoint::infinite()}});
}

IntervalEvent IntervalEvent::closed(double lo, double hi) {
  return from_intervals({{Endpoint::closed(lo), Endpoint::closed(hi)}});
}

IntervalEvent IntervalEvent::at_least(double t) { return from_intervals({{Endpoint::closed(t), Endpoint::infinite()}}); }

IntervalEvent IntervalEvent::greater_than(double t) {
  return from_intervals({{Endpoint::open(t), Endpoint::infinite()}});
}

IntervalEvent IntervalEvent::at_most(double t) { return from_intervals({{Endpoint::infinite(), Endpoint::closed(t)}}); }

IntervalEvent IntervalEvent::less_than(double t) { return from_intervals({{Endpoint::infinite(), Endpoint::open(t)}}); }

IntervalEvent IntervalEvent::complement() const {
  std::vector<EventInterval> gaps;
  Endpoint cursor = Endpoint::infinite();  // -inf
  for (const auto& p : pieces_) {
    if (!p.lo.is_infinite()) gaps.push_back({cursor, flipped(p.lo)});
    if (p.hi.is_infinite()) return from_intervals(std::move(gaps));
    cursor = flipped(p.hi);
  }
  gaps.push_back({cursor, Endpoint::infinite()});
  return from_intervals(std::move(gaps));
}

IntervalEvent IntervalEvent::unite(const IntervalEvent& other) const {
  auto pieces = pieces_;
  pieces.insert(pieces.end(), other.pieces_.begin(), other.pieces_.end());
  return from_intervals(std::move(pieces));
}

IntervalEvent IntervalEvent::intersect(const IntervalEvent& other) const {
  std::vector<EventInterval> pieces;
  for (const auto& a : pieces_) {
    for (const auto& b : other.pieces_) {
      EventInterval p{lower_less(a.lo, b.lo) ? b.lo : a.lo, upper_less(a.hi, b.hi) ? a.hi : b.hi};
      if (!p.is_empty()) pieces.push_back(p);
    }
  }
  return from_intervals(std::move(pieces));
}

bool IntervalEvent::contains(double x) const noexcept {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [x](const EventInterval& p) { return above(p.lo, x) && below(p.hi, x); });
}

bool IntervalEvent::contains(const ClosedInterval& part) const noexcept {
  // Pieces are maximal connected components, so a connected part is inside
  // the union iff it is inside one piece.
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const EventInterval& p) { return above(p.lo, part.lo) && below(p.hi, part.hi); });
}

bool IntervalEvent::contains(const FocalElement& element) const noexcept {
  const auto parts = element.parts();
  return !parts.empty() &&
         std::all_of(parts.begin(), parts.end(), [this](const ClosedInterval& p) { return contains(p); });
}

bool IntervalEvent::intersects(const ClosedInterval& part) const noexcept {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const EventInterval& p) { return above(p.lo, part.hi) && below(p.hi, part.lo); });
}

bool IntervalEvent::intersects(const FocalElement& element) const noexcept {
  const auto parts = element.parts();
  return std::any_of(parts.begin(), parts.end(), [this](const ClosedInterval& p) { return intersects(p); });
}

bool IntervalEvent::subset_of(const IntervalEvent& other) const { return intersect(other) == *this; }

std::string IntervalEvent::to_string() const {
  if (pieces_.empty()) return "{}";
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (i > 0) out += " u ";
    if (p.lo.is_infinite()) {
      out += "(-inf";
    } else {
      out += (p.lo.kind == EndKind::kClosed ? "[" : "(") + format_number(p.lo.value);
    }
    out += ", ";
    if (p.hi.is_infinite()) {
      out += "inf)";
    } else {
      out += format_number(p.hi.value) + (p.hi.kind == EndKind::kClosed ? "]" : ")");
    }
  }
  return out;
}

double belief(const BeliefModel& model, const IntervalEvent& event) {
  double total = 0.0;
  for (const auto& f : model.focal()) {
    if (event.contains(f.element)) total += f.mass;
  }
  return std::clamp(total, 0.0, 1.0);
}

double plausibility(const BeliefModel& model, const IntervalEvent& event) {
  double total = 0.0;
  for (const auto& f : model.focal()) {
    if (event.intersects(f.element)) total += f.mass;
  }
  return std::clamp(total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Total monotonicity

CellAlgebra::CellAlgebra(std::vector<double> grid) : grid_(std::move(grid)) {
  if (std::any_of(grid_.begin(), grid_.end(), [](double g) { return !std::isfinite(g); })) {
    throw std::invalid_argument("grid points must be finite");
  }
  std::sort(grid_.begin(), grid_.end());
  grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
  if (atom_count() > kMaxAtoms) {
    throw GridTooLarge("grid of " + std::to_string(grid_.size()) + " points exceeds the atom limit");
  }
}

IntervalEvent CellAlgebra::atom(std::size_t index) const {
  if (index >= atom_count()) throw std::out_of_range("atom index");
  if (index % 2 == 1) return IntervalEvent::singleton(grid_[index / 2]);
  const std::size_t gap = index / 2;
  const Endpoint lo = gap == 0 ? Endpoint::infinite() : Endpoint::open(grid_[gap - 1]);
  const Endpoint hi = gap == grid_.size() ? Endpoint::infinite() : Endpoint::open(grid_[gap]);
  return IntervalEvent::from_intervals({{lo, hi}});
}

IntervalEvent CellAlgebra::event(std::uint64_t mask) const {
  std::vector<EventInterval> pieces;
  for (std::size_t j = 0; j < atom_count(); ++j) {
    if (mask & (std::uint64_t{1} << j)) {
      const auto a = atom(j);
      pieces.insert(pieces.end(), a.pieces().begin(), a.pieces().end());
    }
  }
  return IntervalEvent::from_intervals(std::move(pieces));
}

namespace {

double choose(double n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

MonotonicityResult check_total_monotonicity(const CellAlgebra& algebra, const CellCapacity& capacity, int order,
                                            std::uint64_t family_budget) {
  if (order < 2 || order > 3) throw std::invalid_argument("order must be 2 or 3");
  const std::uint64_t events = algebra.event_count();
  double families = 0.0;
  for (int k = 2; k <= order; ++k) families += choose(static_cast<double>(events), k);
  if (families > static_cast<double>(family_budget)) {
    throw GridTooLarge("cell algebra has " + std::to_string(events) + " events; " +
                       std::to_string(static_cast<std::uint64_t>(families)) + " families exceed the budget");
  }

  std::vector<double> nu(events);
  for (std::uint64_t m = 0; m < events; ++m) nu[m] = capacity(m);

  constexpr double kSlack = 1e-12;
  MonotonicityResult result;
  auto record = [&](std::vector<std::uint64_t> masks, double lhs, double rhs) {
    result.passed = false;
    result.witness_masks = std::move(masks);
    for (auto m : result.witness_masks) result.witness.push_back(algebra.event(m));
    result.union_value = lhs;
    result.inclusion_exclusion = rhs;
  };

  for (std::uint64_t a = 0; a < events; ++a) {
    for (std::uint64_t b = a + 1; b < events; ++b) {
      ++result.families_checked;
      const double lhs = nu[a | b];
      const double rhs = nu[a] + nu[b] - nu[a & b];
      if (lhs < rhs - kSlack) {
        record({a, b}, lhs, rhs);
        return result;
      }
      if (order < 3) continue;
      for (std::uint64_t c = b + 1; c < events; ++c) {
        ++result.families_checked;
        const double lhs3 = nu[a | b | c];
        const double rhs3 = nu[a] + nu[b] + nu[c] - nu[a & b] - nu[a & c] - nu[b & c] + nu[a & b & c];
        if (lhs3 < rhs3 - kSlack) {
          record({a, b, c}, lhs3, rhs3);
          return result;
        }
      }
    }
  }
  return result;
}

MonotonicityResult total_monotonicity_check(const BeliefModel& model, std::vector<double> grid, int order,
                                            std::uint64_t family_budget) {
  const CellAlgebra algebra(std::move(grid));
  return check_total_monotonicity(
      algebra, [&](std::uint64_t mask) { return belief(model, algebra.event(mask)); }, order, family_budget);
}

}  // namespace beliefclt
