#include "fpcsa/l0.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "fpcsa/errors.hpp"
#include "fpcsa/hash.hpp"

namespace fpcsa {

namespace {

constexpr uint64_t kSegmentSpan = uint64_t{1} << 20;
constexpr uint64_t kSieveCeiling = uint64_t{1} << 40;

// Simple sieve of [2, limit]; used for base primes only, so limit <= 2^20.
std::vector<uint64_t> simple_sieve(uint64_t limit) {
  std::vector<bool> composite(limit + 1, false);
  std::vector<uint64_t> primes;
  for (uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

}  // namespace

std::vector<uint64_t> primes_at_least(uint64_t lower, uint64_t count) {
  if (lower < 2) throw UsageError("prime lower bound must be at least 2");
  if (count < 1) throw UsageError("prime count must be positive");
  // Crude overshoot of the largest prime wanted; only used for the budget
  // check, the sieve itself stops as soon as `count` primes are collected.
  double projected = double(lower) + double(count) *
                                         (std::log(double(lower) + count) + 2.0);
  if (count > 200000000ull || projected > double(kSieveCeiling))
    throw ResourceError("prime request exceeds the supported sieve range");

  std::vector<uint64_t> result;
  result.reserve(count);
  std::vector<uint64_t> base;
  uint64_t base_limit = 1;
  std::vector<bool> composite;
  for (uint64_t lo = lower; result.size() < count; lo += kSegmentSpan) {
    if (lo > kSieveCeiling)
      throw ResourceError("prime request exceeds the supported sieve range");
    uint64_t hi = lo + kSegmentSpan;  // half-open [lo, hi)
    auto root = uint64_t(std::sqrt(double(hi))) + 2;
    if (root > base_limit) {
      base_limit = std::max<uint64_t>(root, 1024);
      base = simple_sieve(base_limit);
    }
    composite.assign(kSegmentSpan, false);
    for (uint64_t p : base) {
      if (p * p >= hi) break;
      uint64_t first = std::max(p * p, (lo + p - 1) / p * p);
      for (uint64_t j = first; j < hi; j += p) composite[j - lo] = true;
    }
    for (uint64_t v = std::max<uint64_t>(lo, 2); v < hi; ++v) {
      if (!composite[v - lo]) {
        result.push_back(v);
        if (result.size() == count) break;
      }
    }
  }
  return result;
}

std::vector<uint64_t> primes_first_n(uint64_t count) {
  return primes_at_least(2, count);
}

void ExactState::add(uint64_t id, int64_t delta) {
  if (delta == 0) return;
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    entries_.emplace(id, delta);
    return;
  }
  int64_t sum = 0;
  if (__builtin_add_overflow(it->second, delta, &sum))
    throw UsageError("turnstile counter overflow for id " + std::to_string(id));
  if (sum == 0)
    entries_.erase(it);
  else
    it->second = sum;
}

int64_t ExactState::value(uint64_t id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second;
}

uint64_t ExactState::l0_mod(uint64_t modulus) const {
  if (modulus < 2) throw UsageError("modulus must be at least 2");
  uint64_t count = 0;
  auto m = int64_t(modulus);
  for (const auto& [id, v] : entries_) count += (v % m) != 0;
  return count;
}

uint64_t ExactState::l0_mod(const FieldSpec& spec) const {
  if (spec.degree() != 1)
    throw UsageError(
        "integer state reduces into prime fields only, got " + spec.to_string());
  return l0_mod(spec.characteristic());
}

uint64_t ExactState::l1() const {
  unsigned __int128 total = 0;
  for (const auto& [id, v] : entries_) {
    uint64_t magnitude =
        v < 0 ? uint64_t(-(v + 1)) + 1 : uint64_t(v);
    total += magnitude;
  }
  if (total > ~uint64_t{0}) throw ResourceError("l1 norm overflows 64 bits");
  return uint64_t(total);
}

uint64_t ExactState::linf() const {
  uint64_t best = 0;
  for (const auto& [id, v] : entries_) {
    uint64_t magnitude = v < 0 ? uint64_t(-(v + 1)) + 1 : uint64_t(v);
    best = std::max(best, magnitude);
  }
  return best;
}

void FieldExactState::add(uint64_t id, FieldElement k) {
  if (k.value >= spec_.order()) throw UsageError("element outside the field");
  if (k.value == 0) return;
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    entries_.emplace(id, k.value);
    return;
  }
  FieldElement sum = spec_.add(FieldElement{it->second}, k);
  if (sum.value == 0)
    entries_.erase(it);
  else
    it->second = sum.value;
}

FieldElement FieldExactState::value(uint64_t id) const {
  auto it = entries_.find(id);
  return FieldElement{it == entries_.end() ? 0 : it->second};
}

ExactState mass_discount(const ExactState& state, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw UsageError("mass discount needs epsilon in (0, 1)");
  // +1e-9 absorbs representation error when epsilon*tau/2 lands on an
  // integer (2/3 of 3 entries must discount exactly 1)
  auto discard = uint64_t(std::floor(epsilon * double(state.l0()) / 2 + 1e-9));
  if (discard == 0) return state;
  std::vector<std::pair<uint64_t, uint64_t>> order;  // (magnitude, id)
  order.reserve(state.l0());
  for (const auto& [id, v] : state.entries()) {
    uint64_t magnitude = v < 0 ? uint64_t(-(v + 1)) + 1 : uint64_t(v);
    order.push_back({magnitude, id});
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::unordered_set<uint64_t> dropped;
  for (uint64_t i = 0; i < discard && i < order.size(); ++i)
    dropped.insert(order[i].second);
  ExactState out;
  for (const auto& [id, v] : state.entries())
    if (!dropped.count(id)) out.add(id, v);
  return out;
}

PrimeScheme PrimeScheme::fixed(uint64_t p) {
  if (!is_prime(p)) throw ConfigError(std::to_string(p) + " is not prime");
  PrimeScheme s;
  s.kind_ = Kind::fixed;
  s.fixed_p_ = p;
  return s;
}

PrimeScheme PrimeScheme::infinity_norm(double epsilon, uint64_t linf_bound,
                                       uint64_t rng_seed) {
  if (!(epsilon > 0.0) || !(epsilon <= 1.0))
    throw ConfigError("scheme epsilon must be in (0, 1]");
  if (linf_bound < 1) throw ConfigError("linf bound must be positive");
  PrimeScheme s;
  s.kind_ = Kind::infinity_norm;
  s.epsilon_ = epsilon;
  s.linf_bound_ = linf_bound;
  s.rng_seed_ = rng_seed;
  return s;
}

PrimeScheme PrimeScheme::average_norm(double epsilon, double average_bound,
                                      uint64_t rng_seed) {
  if (!(epsilon > 0.0) || !(epsilon <= 1.0))
    throw ConfigError("scheme epsilon must be in (0, 1]");
  if (!(average_bound > 0.0))
    throw ConfigError("average-norm bound must be positive");
  PrimeScheme s;
  s.kind_ = Kind::average_norm;
  s.epsilon_ = epsilon;
  s.average_bound_ = average_bound;
  s.rng_seed_ = rng_seed;
  return s;
}

std::vector<uint64_t> PrimeScheme::prime_set() const {
  switch (kind_) {
    case Kind::fixed:
      return {fixed_p_};
    case Kind::infinity_norm: {
      if (linf_bound_ < 2) return {2};
      auto size = uint64_t(
          std::ceil(10.0 * std::log2(double(linf_bound_)) / epsilon_ - 1e-9));
      return primes_first_n(size);
    }
    case Kind::average_norm: {
      auto size = uint64_t(std::ceil(10.0 / epsilon_ - 1e-9));
      auto lower = std::max<uint64_t>(2, uint64_t(std::ceil(average_bound_ - 1e-9)));
      return primes_at_least(lower, size);
    }
  }
  throw UsageError("unknown scheme kind");
}

uint64_t select_prime(const PrimeScheme& scheme) {
  if (scheme.kind() == PrimeScheme::Kind::fixed) return scheme.prime_set()[0];
  std::vector<uint64_t> set = scheme.prime_set();
  // multiply-shift reduction of a PRF draw: bias below set size / 2^64
  uint64_t bits = prf128(scheme.rng_seed(), 0x70726d73656c6374ull).lo;
  auto index = uint64_t((unsigned __int128)(bits)*set.size() >> 64);
  return set[index];
}

double scheme_failure_rate(const PrimeScheme& scheme, const ExactState& state,
                           uint64_t trials) {
  if (trials < 1) throw UsageError("trial count must be positive");
  if (scheme.kind() == PrimeScheme::Kind::fixed)
    throw UsageError("a fixed scheme has no epsilon to define failure");
  std::vector<uint64_t> set = scheme.prime_set();
  double threshold = scheme.epsilon() * double(state.l0());
  uint64_t failures = 0;
  for (uint64_t p : set)
    failures += double(state.l0() - state.l0_mod(p)) > threshold;
  return double(failures) / double(set.size());
}

}  // namespace fpcsa
