#include "fpcsa/field.hpp"

#include <cstdint>
#include <map>
#include <vector>

#include "doctest.h"
#include "fpcsa/errors.hpp"

using namespace fpcsa;

namespace {

// splitmix64: local raw-bit source for the statistical checks here.
uint64_t next_bits(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("prime field construction accepts primes and rejects the rest") {
  CHECK(FieldSpec::prime_field(2).order() == 2);
  CHECK(FieldSpec::prime_field(7).order() == 7);
  // 2^61 - 1 is prime and the largest supported characteristic.
  CHECK(FieldSpec::prime_field((1ull << 61) - 1).order() == (1ull << 61) - 1);
  CHECK_THROWS_AS(FieldSpec::prime_field(1), ConfigError);
  CHECK_THROWS_AS(FieldSpec::prime_field(6), ConfigError);
  CHECK_THROWS_AS(FieldSpec::prime_field(561), ConfigError);   // Carmichael
  CHECK_THROWS_AS(FieldSpec::prime_field(1ull << 61), ConfigError);
  // 2^61 + 13 is prime but out of range.
  CHECK_THROWS_AS(FieldSpec::prime_field((1ull << 61) + 13), ConfigError);
}

TEST_CASE("binary field construction validates the reduction polynomial") {
  FieldSpec f = FieldSpec::binary_field(8);
  CHECK(f.order() == 256);
  CHECK(f.reduction_poly() == 0x11b);
  CHECK(FieldSpec::binary_field(8, 0x11b) == f);
  CHECK_THROWS_AS(FieldSpec::binary_field(8, 0x103), ConfigError);  // reducible
  CHECK_THROWS_AS(FieldSpec::binary_field(8, 0x1b), ConfigError);   // wrong degree
  CHECK_THROWS_AS(FieldSpec::binary_field(0), ConfigError);
  CHECK_THROWS_AS(FieldSpec::binary_field(33), ConfigError);
  CHECK(FieldSpec::binary_field(1) == FieldSpec::prime_field(2));
}

TEST_CASE("every built-in reduction polynomial is irreducible of exact degree") {
  for (unsigned k = 2; k <= 32; ++k) {
    uint64_t poly = builtin_reduction_poly(k);
    CHECK(gf2_poly_degree(poly) == k);
    CHECK(gf2_poly_irreducible(poly));
  }
}

TEST_CASE("field spec text forms round-trip") {
  CHECK(FieldSpec::parse("gf(7)") == FieldSpec::prime_field(7));
  CHECK(FieldSpec::parse("gf(2)") == FieldSpec::prime_field(2));
  CHECK(FieldSpec::parse("gf(2^8)") == FieldSpec::binary_field(8));
  CHECK(FieldSpec::parse("gf(2^1)") == FieldSpec::prime_field(2));
  CHECK(FieldSpec::parse(FieldSpec::binary_field(32).to_string()) ==
        FieldSpec::binary_field(32));
  CHECK(FieldSpec::prime_field(101).to_string() == "gf(101)");
  CHECK(FieldSpec::binary_field(8).to_string() == "gf(2^8)");
  CHECK_THROWS_AS(FieldSpec::parse("gf(6)"), ConfigError);
  CHECK_THROWS_AS(FieldSpec::parse("gf(3^2)"), ConfigError);
  CHECK_THROWS_AS(FieldSpec::parse("gf()"), ConfigError);
  CHECK_THROWS_AS(FieldSpec::parse("z"), ConfigError);
  CHECK_THROWS_AS(FieldSpec::parse("gf(2^33)"), ConfigError);
}

TEST_CASE("pinned arithmetic values") {
  FieldSpec f256 = FieldSpec::binary_field(8, 0x11b);
  CHECK(f256.mul({0x02}, {0x80}).value == 0x1b);
  CHECK(f256.add({0x53}, {0x53}).value == 0);

  // Oracle for the pinned inverse: exhaustive search over GF(2^8).
  uint64_t found = 0;
  for (uint64_t b = 1; b < 256; ++b) {
    if (f256.mul({0x53}, {b}).value == 1) {
      found = b;
      break;
    }
  }
  CHECK(found == 0xca);
  CHECK(f256.inv({0x53}).value == 0xca);

  FieldSpec f7 = FieldSpec::prime_field(7);
  CHECK(f7.add({5}, {4}).value == 2);
  CHECK(f7.mul({3}, {5}).value == 1);
  CHECK(f7.neg({3}).value == 4);
  CHECK(FieldSpec::prime_field(5).inv({3}).value == 2);
}

TEST_CASE("ops reject foreign elements and zero inverses") {
  FieldSpec f7 = FieldSpec::prime_field(7);
  CHECK_THROWS_AS(f7.add({7}, {1}), UsageError);
  CHECK_THROWS_AS(f7.mul({1}, {100}), UsageError);
  CHECK_THROWS_AS(f7.element(7), UsageError);
  CHECK_THROWS_AS(f7.inv({0}), DomainError);
  CHECK_THROWS_AS(FieldSpec::binary_field(8).inv({0}), DomainError);
}

TEST_CASE("embed_integer gives canonical residues on prime fields only") {
  CHECK(FieldSpec::prime_field(7).embed_integer(-1).value == 6);
  CHECK(FieldSpec::prime_field(2).embed_integer(4).value == 0);
  CHECK(FieldSpec::prime_field(101).embed_integer(2020).value == 0);
  CHECK(FieldSpec::prime_field(7).embed_integer(INT64_MIN).value ==
        ((static_cast<__int128>(INT64_MIN) % 7) + 7) % 7);
  CHECK_THROWS_AS(FieldSpec::binary_field(8).embed_integer(1), UsageError);
}

TEST_CASE("cell width is ceil(log2(order))") {
  CHECK(FieldSpec::prime_field(2).cell_bits() == 1);
  CHECK(FieldSpec::prime_field(7).cell_bits() == 3);
  CHECK(FieldSpec::prime_field(101).cell_bits() == 7);
  CHECK(FieldSpec::binary_field(8).cell_bits() == 8);
  CHECK(FieldSpec::binary_field(32).cell_bits() == 32);
  CHECK(FieldSpec::prime_field((1ull << 61) - 1).cell_bits() == 61);
}

namespace {

// Exhaustive axiom check over all pairs and triples of one field.
void check_axioms_exhaustive(const FieldSpec& f) {
  uint64_t n = f.order();
  std::vector<uint64_t> add(n * n), mul(n * n);
  for (uint64_t a = 0; a < n; ++a) {
    for (uint64_t b = 0; b < n; ++b) {
      add[a * n + b] = f.add({a}, {b}).value;
      mul[a * n + b] = f.mul({a}, {b}).value;
    }
  }
  // identities, commutativity, inverses: all pairs / elements
  for (uint64_t a = 0; a < n; ++a) {
    REQUIRE(add[a * n + 0] == a);
    REQUIRE(mul[a * n + 1] == a);
    REQUIRE(mul[a * n + 0] == 0);
    REQUIRE(add[a * n + f.neg({a}).value] == 0);
    if (a != 0) REQUIRE(mul[a * n + f.inv({a}).value] == 1);
    for (uint64_t b = 0; b < n; ++b) {
      REQUIRE(add[a * n + b] == add[b * n + a]);
      REQUIRE(mul[a * n + b] == mul[b * n + a]);
    }
  }
  // associativity and distributivity: all triples
  for (uint64_t a = 0; a < n; ++a) {
    for (uint64_t b = 0; b < n; ++b) {
      uint64_t ab_s = add[a * n + b], ab_m = mul[a * n + b];
      for (uint64_t c = 0; c < n; ++c) {
        REQUIRE(add[ab_s * n + c] == add[a * n + add[b * n + c]]);
        REQUIRE(mul[ab_m * n + c] == mul[a * n + mul[b * n + c]]);
        REQUIRE(mul[a * n + add[b * n + c]] == add[ab_m * n + mul[a * n + c]]);
      }
    }
  }
}

// Sampled axiom check for fields too large to enumerate.
void check_axioms_sampled(const FieldSpec& f, int triples) {
  uint64_t state = 0x1234 + f.order();
  for (int i = 0; i < triples; ++i) {
    FieldElement a = f.sample_uniform(next_bits(state));
    FieldElement b = f.sample_uniform(next_bits(state));
    FieldElement c = f.sample_uniform(next_bits(state));
    REQUIRE(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)));
    REQUIRE(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
    REQUIRE(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
    REQUIRE(f.add(a, f.neg(a)).value == 0);
    REQUIRE(f.sub(f.add(a, b), b) == a);
    if (a.value != 0) REQUIRE(f.mul(a, f.inv(a)).value == 1);
  }
}

}  // namespace

TEST_CASE("field axioms hold exhaustively for small orders") {
  for (uint64_t p : {2, 3, 5, 7, 11, 13, 31, 61}) {
    check_axioms_exhaustive(FieldSpec::prime_field(p));
  }
  for (unsigned k : {2u, 3u, 4u, 5u, 6u}) {
    check_axioms_exhaustive(FieldSpec::binary_field(k));
  }
}

TEST_CASE("field axioms hold on sampled triples for large fields") {
  check_axioms_sampled(FieldSpec::prime_field((1ull << 61) - 1), 20000);
  check_axioms_sampled(FieldSpec::prime_field(4294967311ull), 20000);  // > 2^32
  check_axioms_sampled(FieldSpec::binary_field(32), 20000);
  check_axioms_sampled(FieldSpec::binary_field(16), 20000);
}

TEST_CASE("sample_uniform is chi-square uniform at 1e-6 significance") {
  // Critical values chi2(1 - 1e-6, df), precomputed.
  std::map<uint64_t, double> crit = {
      {2, 23.93}, {7, 38.26}, {101, 182.13}, {256, 377.08}};
  const int draws = 1000000;
  for (auto [order, bound] : crit) {
    FieldSpec f = order == 256 ? FieldSpec::binary_field(8)
                               : FieldSpec::prime_field(order);
    std::vector<int> counts(order, 0);
    uint64_t state = 0xfeed + order;
    for (int i = 0; i < draws; ++i) {
      ++counts[f.sample_uniform(next_bits(state)).value];
    }
    double expected = double(draws) / double(order);
    double stat = 0;
    for (int c : counts) {
      double d = c - expected;
      stat += d * d / expected;
    }
    INFO("order ", order, " chi2 ", stat);
    CHECK(stat < bound);
  }
}

TEST_CASE("primality test agrees with a sieve on small numbers") {
  // Oracle: plain sieve of Eratosthenes.
  const int limit = 200000;
  std::vector<bool> composite(limit + 1, false);
  for (int i = 2; i * i <= limit; ++i) {
    if (!composite[i]) {
      for (int j = i * i; j <= limit; j += i) composite[j] = true;
    }
  }
  for (int i = 0; i <= limit; ++i) {
    REQUIRE(is_prime(i) == (i >= 2 && !composite[i]));
  }
  CHECK(is_prime((1ull << 61) - 1));
  CHECK_FALSE(is_prime((1ull << 61) + 1));
  CHECK(is_prime(4294967311ull));
}
