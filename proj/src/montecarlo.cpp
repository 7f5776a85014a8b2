#include "beliefclt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace beliefclt {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RandomStream::next_u64() noexcept {
  ++position_;
  return mix64(key_ + position_ * kGoldenGamma);
}

double RandomStream::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

RandomStream derive_stream(std::uint64_t seed, std::uint64_t replication, std::uint64_t coordinate) {
  // Two rounds so that nearby (seed, replication) pairs land on unrelated keys.
  const std::uint64_t key = mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) + mix64(replication + kGoldenGamma));
  return RandomStream(key, coordinate);
}

// ---------------------------------------------------------------------------
// Plans

const std::vector<AlphaPair>& SimPlan::pairs_for(std::int64_t n) const {
  const auto it = alpha_pairs_by_n.find(n);
  return it == alpha_pairs_by_n.end() ? alpha_pairs : it->second;
}

std::vector<std::int64_t> default_n_schedule() { return {16, 64, 256, 1024, 4096, 16384}; }

std::vector<double> default_alpha_grid() { return {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}; }

std::vector<AlphaPair> default_alpha_pairs(std::span<const double> grid) {
  std::vector<AlphaPair> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double a = std::min(grid[i], grid[j]);
      const double b = std::max(grid[i], grid[j]);
      out.push_back({a, b});
    }
  }
  return out;
}

void validate_plan(const SimPlan& plan) {
  if (plan.reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (plan.n_values.empty()) throw std::invalid_argument("n_values is empty");
  for (std::size_t i = 0; i < plan.n_values.size(); ++i) {
    if (plan.n_values[i] < 1) throw std::invalid_argument("n values must be positive");
    if (i > 0 && plan.n_values[i] <= plan.n_values[i - 1]) {
      throw std::invalid_argument("n values must be strictly increasing");
    }
  }
  for (const auto& [n, pairs] : plan.alpha_pairs_by_n) {
    if (!std::binary_search(plan.n_values.begin(), plan.n_values.end(), n)) {
      throw std::invalid_argument("per-n alpha pairs given for n = " + std::to_string(n) + " not in n_values");
    }
  }
  if (!(plan.slack >= 0.0)) throw std::invalid_argument("slack must be nonnegative");
  auto bad = [](double a) { return std::isnan(a); };
  if (std::any_of(plan.alpha_one_sided.begin(), plan.alpha_one_sided.end(), bad)) {
    throw std::invalid_argument("alpha is NaN");
  }
}

std::vector<std::string> plan_warnings(const SimPlan& plan) {
  std::vector<std::string> out;
  auto scan = [&](const std::vector<AlphaPair>& pairs, const std::string& where) {
    for (const auto& p : pairs) {
      if (p.lower > p.upper) {
        out.push_back("alpha pair (" + std::to_string(p.lower) + ", " + std::to_string(p.upper) + ")" + where +
                      " has alpha1 > alpha2; the event is still evaluated as written");
      }
    }
  };
  scan(plan.alpha_pairs, "");
  for (const auto& [n, pairs] : plan.alpha_pairs_by_n) scan(pairs, " at n = " + std::to_string(n));
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

FocalSampler::FocalSampler(const BeliefModel& model) {
  if (model.size() == 0) throw std::invalid_argument("model has no focal elements");
  double cumulative = 0.0;
  double total = 0.0;
  for (const auto& f : model.focal()) total += f.mass;
  const auto focal = model.focal();
  for (std::size_t i = 0; i < focal.size(); ++i) {
    mins_.push_back(focal[i].element.min());
    maxs_.push_back(focal[i].element.max());
    if (i + 1 == focal.size()) break;
    cumulative += focal[i].mass;
    // Focal i is drawn when the 64-bit word is below thresholds_[i] and not
    // below the previous threshold.
    const double scaled = std::ldexp(cumulative / total, 64);
    thresholds_.push_back(scaled >= 0x1.0p64 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(scaled));
  }
}

std::size_t FocalSampler::draw(std::uint64_t u) const noexcept {
  if (thresholds_.size() <= 8) {
    std::size_t idx = 0;
    for (const auto t : thresholds_) idx += u >= t;
    return idx;
  }
  return static_cast<std::size_t>(std::upper_bound(thresholds_.begin(), thresholds_.end(), u) - thresholds_.begin());
}

void FocalSampler::accumulate(std::int64_t steps, RandomStream& stream, std::span<std::int64_t> counts) const noexcept {
  for (std::int64_t i = 0; i < steps; ++i) ++counts[draw(stream.next_u64())];
}

TrialSums FocalSampler::sums(std::span<const std::int64_t> counts) const noexcept {
  TrialSums out;
  for (std::size_t k = 0; k < mins_.size(); ++k) {
    const double c = static_cast<double>(counts[k]);
    out.min_sum += c * mins_[k];
    out.max_sum += c * maxs_[k];
  }
  return out;
}

TrialSums sample_trial(const BeliefModel& model, std::int64_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("trial length must be positive");
  const FocalSampler sampler(model);
  std::vector<std::int64_t> counts(sampler.size(), 0);
  sampler.accumulate(n, stream, counts);
  return sampler.sums(counts);
}

// ---------------------------------------------------------------------------
// Event estimation

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kOneSidedLower: return "one_sided_lower";
    case EventKind::kOneSidedUpper: return "one_sided_upper";
    case EventKind::kTwoSided: return "two_sided";
  }
  return "unknown";
}

double EventEstimate::frequency() const noexcept {
  return reps > 0 ? static_cast<double>(count) / static_cast<double>(reps) : 0.0;
}

double EventEstimate::standard_error() const noexcept {
  if (reps <= 0) return 0.0;
  const double f = frequency();
  return std::sqrt(f * (1.0 - f) / static_cast<double>(reps));
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("BELIEFCLT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// The event layout shared by estimate_events and exact_events.
struct EventLayout {
  struct Entry {
    std::int64_t n;
    EventKind kind;
    double alpha1;
    double alpha2;
  };
  std::vector<Entry> entries;
  // entries for n_values[k] occupy [offsets[k], offsets[k + 1]).
  std::vector<std::size_t> offsets;
};

EventLayout layout_events(const SimPlan& plan) {
  EventLayout layout;
  for (const auto n : plan.n_values) {
    layout.offsets.push_back(layout.entries.size());
    for (const double a : plan.alpha_one_sided) layout.entries.push_back({n, EventKind::kOneSidedLower, a, INFINITY});
    for (const double a : plan.alpha_one_sided) layout.entries.push_back({n, EventKind::kOneSidedUpper, -INFINITY, a});
    for (const auto& p : plan.pairs_for(n)) layout.entries.push_back({n, EventKind::kTwoSided, p.lower, p.upper});
  }
  layout.offsets.push_back(layout.entries.size());
  return layout;
}

struct Normalizer {
  double lower_mean, upper_mean, lower_sd, upper_sd;

  // (U, V) for a trial of length n.
  std::pair<double, double> operator()(const TrialSums& s, std::int64_t n) const {
    const double nn = static_cast<double>(n);
    const double root = std::sqrt(nn);
    return {(s.min_sum - nn * lower_mean) / (root * lower_sd), (s.max_sum - nn * upper_mean) / (root * upper_sd)};
  }
};

bool event_holds(const EventLayout::Entry& e, double u, double v) {
  switch (e.kind) {
    case EventKind::kOneSidedLower: return u >= e.alpha1;
    case EventKind::kOneSidedUpper: return v < e.alpha2;
    case EventKind::kTwoSided: return e.alpha1 <= u && v <= e.alpha2;
  }
  return false;
}

Normalizer normalizer_for(const ChoquetMoments& moments) {
  if (!(moments.lower_sd >= kDegenerateSd) || !(moments.upper_sd >= kDegenerateSd)) {
    throw DegenerateVariance("cannot normalize sums: a standard deviation is zero");
  }
  return {moments.lower_mean, moments.upper_mean, moments.lower_sd, moments.upper_sd};
}

}  // namespace

SimResult estimate_events(const SimPlan& plan, const ChoquetMoments& moments, unsigned workers) {
  validate_plan(plan);
  const Normalizer normalize = normalizer_for(moments);
  const EventLayout layout = layout_events(plan);
  const FocalSampler sampler(plan.model);
  if (workers == 0) workers = default_worker_count();
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, plan.reps));

  auto run_block = [&](std::int64_t first, std::int64_t last, std::vector<std::int64_t>& tally) {
    std::vector<std::int64_t> counts(sampler.size());
    for (std::int64_t r = first; r < last; ++r) {
      std::fill(counts.begin(), counts.end(), 0);
      RandomStream stream = derive_stream(plan.seed, static_cast<std::uint64_t>(r), 0);
      std::int64_t walked = 0;
      for (std::size_t k = 0; k < plan.n_values.size(); ++k) {
        const std::int64_t n = plan.n_values[k];
        sampler.accumulate(n - walked, stream, counts);
        walked = n;
        const auto [u, v] = normalize(sampler.sums(counts), n);
        for (std::size_t e = layout.offsets[k]; e < layout.offsets[k + 1]; ++e) {
          tally[e] += event_holds(layout.entries[e], u, v);
        }
      }
    }
  };

  std::vector<std::vector<std::int64_t>> tallies(workers, std::vector<std::int64_t>(layout.entries.size(), 0));
  if (workers == 1) {
    run_block(0, plan.reps, tallies[0]);
  } else {
    std::vector<std::jthread> pool;
    const std::int64_t chunk = (plan.reps + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t first = std::min<std::int64_t>(plan.reps, w * chunk);
      const std::int64_t last = std::min<std::int64_t>(plan.reps, first + chunk);
      pool.emplace_back([&, first, last, w] { run_block(first, last, tallies[w]); });
    }
  }

  SimResult result;
  result.seed = plan.seed;
  result.events.reserve(layout.entries.size());
  for (std::size_t e = 0; e < layout.entries.size(); ++e) {
    std::int64_t count = 0;
    for (const auto& t : tallies) count += t[e];
    const auto& entry = layout.entries[e];
    result.events.push_back({entry.n, entry.kind, entry.alpha1, entry.alpha2, count, plan.reps});
  }
  return result;
}

std::vector<ExactEvent> exact_events(const SimPlan& plan, const ChoquetMoments& moments) {
  validate_plan(plan);
  const Normalizer normalize = normalizer_for(moments);
  const EventLayout layout = layout_events(plan);
  const auto focal = plan.model.focal();
  const std::size_t k = focal.size();

  std::vector<double> log_mass(k);
  double total = 0.0;
  for (const auto& f : focal) total += f.mass;
  for (std::size_t i = 0; i < k; ++i) log_mass[i] = std::log(focal[i].mass / total);

  std::vector<ExactEvent> out;
  for (const auto& e : layout.entries) out.push_back({e.n, e.kind, e.alpha1, e.alpha2, 0.0});

  for (std::size_t idx = 0; idx < plan.n_values.size(); ++idx) {
    const std::int64_t n = plan.n_values[idx];
    // Number of count vectors: C(n + k - 1, k - 1).
    double compositions = 1.0;
    for (std::size_t j = 1; j < k; ++j) compositions = compositions * static_cast<double>(n + j) / static_cast<double>(j);
    if (compositions > static_cast<double>(kExactCompositionBudget)) {
      throw GridTooLarge("exact enumeration at n = " + std::to_string(n) + " needs " +
                         std::to_string(static_cast<std::uint64_t>(compositions)) + " count vectors");
    }

    std::vector<std::int64_t> counts(k, 0);
    const double log_n_factorial = std::lgamma(static_cast<double>(n) + 1.0);
    // Depth-first over counts[0..k-2]; the last count takes the remainder.
    auto visit = [&](auto&& self, std::size_t pos, std::int64_t remaining) -> void {
      if (pos + 1 == k) {
        counts[pos] = remaining;
        double log_p = log_n_factorial;
        TrialSums sums;
        for (std::size_t i = 0; i < k; ++i) {
          const double c = static_cast<double>(counts[i]);
          log_p += c * log_mass[i] - std::lgamma(c + 1.0);
          sums.min_sum += c * focal[i].element.min();
          sums.max_sum += c * focal[i].element.max();
        }
        const double p = std::exp(log_p);
        const auto [u, v] = normalize(sums, n);
        for (std::size_t e = layout.offsets[idx]; e < layout.offsets[idx + 1]; ++e) {
          if (event_holds(layout.entries[e], u, v)) out[e].probability += p;
        }
        return;
      }
      for (std::int64_t c = 0; c <= remaining; ++c) {
        counts[pos] = c;
        self(self, pos + 1, remaining - c);
      }
    };
    visit(visit, 0, n);
  }
  for (auto& e : out) e.probability = std::clamp(e.probability, 0.0, 1.0);
  return out;
}

}  // namespace beliefclt
