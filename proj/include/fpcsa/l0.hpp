#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fpcsa/field.hpp"

namespace fpcsa {

// The first `count` primes, increasing. Segmented sieve.
std::vector<uint64_t> primes_first_n(uint64_t count);

// The first `count` primes >= lower, increasing.
std::vector<uint64_t> primes_at_least(uint64_t lower, uint64_t count);

// Exact integer turnstile state: id -> running sum, zero entries absent.
// The ground truth the sketch estimates are judged against.
class ExactState {
 public:
  void add(uint64_t id, int64_t delta);
  int64_t value(uint64_t id) const;

  uint64_t l0() const { return entries_.size(); }
  // Count of entries not divisible by the modulus: the L0 norm the state
  // presents after reduction into GF(p).
  uint64_t l0_mod(uint64_t modulus) const;
  uint64_t l0_mod(const FieldSpec& spec) const;
  uint64_t l1() const;
  uint64_t linf() const;

  const std::unordered_map<uint64_t, int64_t>& entries() const {
    return entries_;
  }

 private:
  std::unordered_map<uint64_t, int64_t> entries_;
};

// Exact field-valued turnstile state: id -> field element, zeros absent.
class FieldExactState {
 public:
  explicit FieldExactState(const FieldSpec& spec) : spec_(spec) {}

  const FieldSpec& field() const { return spec_; }
  void add(uint64_t id, FieldElement k);
  FieldElement value(uint64_t id) const;
  uint64_t l0() const { return entries_.size(); }

  const std::unordered_map<uint64_t, uint64_t>& entries() const {
    return entries_;
  }

 private:
  FieldSpec spec_;
  std::unordered_map<uint64_t, uint64_t> entries_;
};

// Zero out the floor(epsilon * l0 / 2) entries of largest magnitude, ties
// going to smaller ids first. The transform behind the relaxed L0 bound:
// discarding an epsilon/2 mass of heavy entries caps how much any candidate
// prime can hide.
ExactState mass_discount(const ExactState& state, double epsilon);

// How the reduction prime is chosen before streaming begins.
//   fixed(p):         always p.
//   infinity_norm:    uniform over the smallest ceil(10 log2(B) / eps)
//                     primes, B a caller-supplied bound on the final linf
//                     norm. B < 2 degenerates to {2}, exact by the
//                     threshold rule since every entry is then 0 or +-1.
//   average_norm:     uniform over the first ceil(10 / eps) primes >=
//                     ceil(B), B a caller-supplied bound on l1/l0.
class PrimeScheme {
 public:
  enum class Kind { fixed, infinity_norm, average_norm };

  static PrimeScheme fixed(uint64_t p);
  static PrimeScheme infinity_norm(double epsilon, uint64_t linf_bound,
                                   uint64_t rng_seed);
  static PrimeScheme average_norm(double epsilon, double average_bound,
                                  uint64_t rng_seed);

  Kind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  uint64_t rng_seed() const { return rng_seed_; }

  // Same scheme, different draw: the harness reseeds per trial.
  PrimeScheme with_seed(uint64_t rng_seed) const {
    PrimeScheme copy = *this;
    copy.rng_seed_ = rng_seed;
    return copy;
  }

  // The full candidate set (size 1 for fixed schemes).
  std::vector<uint64_t> prime_set() const;

 private:
  PrimeScheme() = default;

  Kind kind_ = Kind::fixed;
  uint64_t fixed_p_ = 2;
  double epsilon_ = 0;
  uint64_t linf_bound_ = 0;
  double average_bound_ = 0;
  uint64_t rng_seed_ = 0;
};

// Uniform draw from the scheme's prime set, deterministic in rng_seed.
uint64_t select_prime(const PrimeScheme& scheme);

// Fraction of the scheme's primes p for which reducing mod p hides more
// than an epsilon fraction of the support: l0 - l0_mod(p) > epsilon * l0.
// The set is always enumerable, so the fraction is exact; `trials` is
// validated for interface compatibility but sampling is never needed.
double scheme_failure_rate(const PrimeScheme& scheme, const ExactState& state,
                           uint64_t trials);

}  // namespace fpcsa
