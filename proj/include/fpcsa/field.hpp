#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fpcsa {

// Value of a single field element. Always < FieldSpec::order() for the field
// it belongs to; ops validate this and throw UsageError on a foreign element.
struct FieldElement {
  uint64_t value = 0;
  friend bool operator==(FieldElement, FieldElement) = default;
};

// A supported finite field: GF(p) for prime p < 2^61, or GF(2^k) for
// 1 <= k <= 32 with an irreducible reduction polynomial (bit i = coeff of x^i,
// degree-k bit included). Validation happens once at construction; copies are
// cheap and carry no further checks.
class FieldSpec {
 public:
  static FieldSpec prime_field(uint64_t p);
  // Built-in reduction polynomial for the degree.
  static FieldSpec binary_field(unsigned degree);
  static FieldSpec binary_field(unsigned degree, uint64_t reduction_poly);
  // Text forms: "gf(7)", "gf(2^8)".
  static FieldSpec parse(std::string_view text);
  std::string to_string() const;

  uint64_t characteristic() const { return characteristic_; }
  unsigned degree() const { return degree_; }
  uint64_t reduction_poly() const { return reduction_poly_; }  // 0 when degree == 1
  uint64_t order() const { return order_; }
  // Storage width of one element: ceil(log2(order)).
  unsigned cell_bits() const;

  FieldElement zero() const { return {0}; }
  FieldElement one() const { return {1}; }
  FieldElement element(uint64_t value) const;  // range-checked

  FieldElement add(FieldElement a, FieldElement b) const;
  FieldElement sub(FieldElement a, FieldElement b) const;
  FieldElement neg(FieldElement a) const;
  FieldElement mul(FieldElement a, FieldElement b) const;
  FieldElement inv(FieldElement a) const;  // a != 0

  // Maps 64 uniform bits to a uniform element: low-k-bits for GF(2^k),
  // widening multiply-shift for GF(p) (bias p / 2^64, rejection-free).
  FieldElement sample_uniform(uint64_t raw_bits) const;

  // Canonical residue of z mod p. Degree-1 fields only.
  FieldElement embed_integer(int64_t z) const;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;

 private:
  FieldSpec() = default;
  void check(FieldElement a) const;

  uint64_t characteristic_ = 2;
  unsigned degree_ = 1;
  uint64_t reduction_poly_ = 0;
  uint64_t order_ = 2;
};

// Deterministic Miller-Rabin, exact for all n < 2^63.
bool is_prime(uint64_t n);

// GF(2)[x] utilities (bitmask polynomials). Exposed for the reduction-poly
// validation tests.
unsigned gf2_poly_degree(uint64_t poly);
uint64_t gf2_poly_mod(uint64_t a, uint64_t b);
bool gf2_poly_irreducible(uint64_t poly);

// Shipped irreducible polynomial for GF(2^degree), degree in [2, 32].
uint64_t builtin_reduction_poly(unsigned degree);

}  // namespace fpcsa
