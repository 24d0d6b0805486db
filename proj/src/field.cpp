#include "fpcsa/field.hpp"

#include <array>
#include <bit>
#include <charconv>

#include "fpcsa/errors.hpp"

namespace fpcsa {

namespace {

constexpr uint64_t kMaxPrime = uint64_t{1} << 61;  // exclusive

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

uint64_t powmod(uint64_t base, uint64_t e, uint64_t p) {
  uint64_t r = 1 % p;
  base %= p;
  while (e) {
    if (e & 1) r = mulmod(r, base, p);
    base = mulmod(base, base, p);
    e >>= 1;
  }
  return r;
}

// Lexicographically smallest irreducible polynomial of each degree.
// Verified irreducible at construction and again by the test suite.
constexpr std::array<uint64_t, 33> kReductionPoly = {
    0,         0,         0x7,        0xb,        0x13,      0x25,
    0x43,      0x83,      0x11b,      0x203,      0x409,     0x805,
    0x1009,    0x201b,    0x4021,     0x8003,     0x1002b,   0x20009,
    0x40009,   0x80027,   0x100009,   0x200005,   0x400003,  0x800021,
    0x100001b, 0x2000009, 0x400001b,  0x8000027,  0x10000003, 0x20000005,
    0x40000003, 0x80000009, 0x10000008d};

}  // namespace

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t q : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n % q == 0) return n == q;
  }
  uint64_t d = n - 1;
  int s = std::countr_zero(d);
  d >>= s;
  // Deterministic witness set for n < 3.3e24 (covers the full uint64 range).
  for (uint64_t a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

unsigned gf2_poly_degree(uint64_t poly) {
  if (poly == 0) throw DomainError("degree of zero polynomial");
  return 63 - std::countl_zero(poly);
}

uint64_t gf2_poly_mod(uint64_t a, uint64_t b) {
  if (b == 0) throw DomainError("polynomial division by zero");
  unsigned db = gf2_poly_degree(b);
  while (a && gf2_poly_degree(a) >= db) a ^= b << (gf2_poly_degree(a) - db);
  return a;
}

bool gf2_poly_irreducible(uint64_t poly) {
  if (poly < 2) return false;
  unsigned d = gf2_poly_degree(poly);
  if (d == 0) return false;
  for (unsigned dd = 1; dd <= d / 2; ++dd) {
    for (uint64_t c = uint64_t{1} << dd; c < (uint64_t{2} << dd); ++c) {
      if (gf2_poly_mod(poly, c) == 0) return false;
    }
  }
  return true;
}

uint64_t builtin_reduction_poly(unsigned degree) {
  if (degree < 2 || degree > 32)
    throw ConfigError("no built-in reduction polynomial for degree " +
                      std::to_string(degree));
  return kReductionPoly[degree];
}

FieldSpec FieldSpec::prime_field(uint64_t p) {
  if (p >= kMaxPrime)
    throw ConfigError("prime field characteristic must be < 2^61");
  if (!is_prime(p))
    throw ConfigError(std::to_string(p) + " is not prime");
  FieldSpec s;
  s.characteristic_ = p;
  s.degree_ = 1;
  s.reduction_poly_ = 0;
  s.order_ = p;
  return s;
}

FieldSpec FieldSpec::binary_field(unsigned degree) {
  if (degree == 1) return prime_field(2);
  return binary_field(degree, builtin_reduction_poly(degree));
}

FieldSpec FieldSpec::binary_field(unsigned degree, uint64_t reduction_poly) {
  if (degree < 2 || degree > 32)
    throw ConfigError("binary field degree must be in [1, 32]");
  if (reduction_poly == 0 || gf2_poly_degree(reduction_poly) != degree)
    throw ConfigError("reduction polynomial degree does not match field degree");
  if (!gf2_poly_irreducible(reduction_poly))
    throw ConfigError("reduction polynomial is reducible");
  FieldSpec s;
  s.characteristic_ = 2;
  s.degree_ = degree;
  s.reduction_poly_ = reduction_poly;
  s.order_ = uint64_t{1} << degree;
  return s;
}

FieldSpec FieldSpec::parse(std::string_view text) {
  auto fail = [&] {
    throw ConfigError("unrecognized field spec '" + std::string(text) +
                      "' (expected gf(p) or gf(2^k))");
  };
  if (text.size() < 5 || text.substr(0, 3) != "gf(" || text.back() != ')') fail();
  std::string_view body = text.substr(3, text.size() - 4);
  auto parse_u64 = [&](std::string_view s) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail();
    return v;
  };
  if (auto caret = body.find('^'); caret != std::string_view::npos) {
    if (parse_u64(body.substr(0, caret)) != 2)
      throw ConfigError("only characteristic-2 extension fields are supported");
    uint64_t k = parse_u64(body.substr(caret + 1));
    if (k < 1 || k > 32)
      throw ConfigError("extension degree must be in [1, 32]");
    return binary_field(static_cast<unsigned>(k));
  }
  return prime_field(parse_u64(body));
}

std::string FieldSpec::to_string() const {
  if (degree_ == 1) return "gf(" + std::to_string(characteristic_) + ")";
  return "gf(2^" + std::to_string(degree_) + ")";
}

unsigned FieldSpec::cell_bits() const {
  return static_cast<unsigned>(std::bit_width(order_ - 1));
}

void FieldSpec::check(FieldElement a) const {
  if (a.value >= order_)
    throw UsageError("element value " + std::to_string(a.value) +
                     " is not valid in " + to_string());
}

FieldElement FieldSpec::element(uint64_t value) const {
  FieldElement e{value};
  check(e);
  return e;
}

FieldElement FieldSpec::add(FieldElement a, FieldElement b) const {
  check(a);
  check(b);
  if (degree_ > 1) return {a.value ^ b.value};
  uint64_t s = a.value + b.value;  // < 2^62, no overflow
  if (s >= order_) s -= order_;
  return {s};
}

FieldElement FieldSpec::sub(FieldElement a, FieldElement b) const {
  return add(a, neg(b));
}

FieldElement FieldSpec::neg(FieldElement a) const {
  check(a);
  if (degree_ > 1 || a.value == 0) return a;
  return {order_ - a.value};
}

FieldElement FieldSpec::mul(FieldElement a, FieldElement b) const {
  check(a);
  check(b);
  if (degree_ == 1) return {mulmod(a.value, b.value, order_)};
  // Carry-less shift-and-xor schoolbook multiply with per-step reduction.
  uint64_t x = a.value, y = b.value, r = 0;
  uint64_t top = uint64_t{1} << degree_;
  while (y) {
    if (y & 1) r ^= x;
    y >>= 1;
    x <<= 1;
    if (x & top) x ^= reduction_poly_;
  }
  return {r};
}

FieldElement FieldSpec::inv(FieldElement a) const {
  check(a);
  if (a.value == 0) throw DomainError("inverse of zero in " + to_string());
  if (degree_ == 1) {
    // Extended Euclid; Bezout coefficients stay within +-p.
    __int128 old_r = static_cast<__int128>(order_), r = a.value;
    __int128 old_s = 0, s = 1;
    while (r != 0) {
      __int128 q = old_r / r;
      __int128 t = old_r - q * r;
      old_r = r;
      r = t;
      t = old_s - q * s;
      old_s = s;
      s = t;
    }
    if (old_s < 0) old_s += static_cast<__int128>(order_);
    return {static_cast<uint64_t>(old_s)};
  }
  // a^(2^k - 2) by square and multiply.
  FieldElement result = one(), base = a;
  uint64_t e = order_ - 2;
  while (e) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
    e >>= 1;
  }
  return result;
}

FieldElement FieldSpec::sample_uniform(uint64_t raw_bits) const {
  if (degree_ > 1) return {raw_bits & (order_ - 1)};
  return {static_cast<uint64_t>(
      (static_cast<unsigned __int128>(raw_bits) * order_) >> 64)};
}

FieldElement FieldSpec::embed_integer(int64_t z) const {
  if (degree_ != 1)
    throw UsageError("embed_integer requires a prime field, got " + to_string());
  __int128 r = static_cast<__int128>(z) % static_cast<__int128>(order_);
  if (r < 0) r += static_cast<__int128>(order_);
  return {static_cast<uint64_t>(r)};
}

}  // namespace fpcsa
