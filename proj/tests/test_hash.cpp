#include "fpcsa/hash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "fpcsa/errors.hpp"

using namespace fpcsa;

TEST_CASE("plan construction validates parameters") {
  CHECK_THROWS_AS(HashPlan(1, 0, 64), ConfigError);
  CHECK_THROWS_AS(HashPlan(1, 4, 0), ConfigError);
  CHECK_THROWS_AS(HashPlan(1, 4, 65), ConfigError);
  CHECK_THROWS_AS(HashPlan(1, 4, 64, {0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(HashPlan(1, 2, 64, {0.1, 1.0}), ConfigError);
  CHECK_THROWS_AS(HashPlan(1, 2, 64, {-0.1, 0.5}), ConfigError);
  CHECK(HashPlan(1, 3, 1).columns() == 1);
}

TEST_CASE("plans are deterministic in the seed") {
  FieldSpec f = FieldSpec::binary_field(8);
  HashPlan a(77, 64, 64), b(77, 64, 64), c(78, 64, 64);
  CHECK(a.offsets() == derive_offsets(77, 64));
  bool any_diff = false;
  for (uint64_t v = 0; v < 10000; ++v) {
    CellAssignment x = a.assign(f, v), y = b.assign(f, v), z = c.assign(f, v);
    REQUIRE(x.row == y.row);
    REQUIRE(x.level == y.level);
    REQUIRE(x.g_value == y.g_value);
    any_diff |= (x.row != z.row) || (x.level != z.level) || !(x.g_value == z.g_value);
  }
  CHECK(any_diff);
}

TEST_CASE("level law: P(level = j) = 2^(-j-offset)") {
  // One row with a forced offset isolates the level deviate.
  FieldSpec f = FieldSpec::prime_field(2);
  const int draws = 1000000;
  for (double theta : {0.0, 0.37, 0.91}) {
    HashPlan plan(5, 1, 64, {theta});
    std::vector<int> counts(64, 0);
    for (uint64_t v = 0; v < draws; ++v) {
      ++counts[plan.assign(f, v).level];
    }
    for (int j = 1; j <= 12; ++j) {
      double p = std::exp2(-j - theta);
      double sigma = std::sqrt(p * (1 - p) / draws);
      INFO("theta ", theta, " level ", j);
      CHECK(std::abs(counts[j] / double(draws) - p) < 5 * sigma);
    }
    // level 0 absorbs the sub-unit mass
    double p0 = 1 - std::exp2(-theta);
    double sigma0 = std::sqrt(std::max(p0 * (1 - p0), 1e-12) / draws);
    CHECK(std::abs(counts[0] / double(draws) - p0) < 5 * sigma0 + 5e-6);
    // tail law at the offset: P(level >= 6) = 2^(-5-theta)
    int tail = 0;
    for (int j = 6; j < 64; ++j) tail += counts[j];
    double pt = std::exp2(-5 - theta);
    CHECK(std::abs(tail / double(draws) - pt) <
          5 * std::sqrt(pt * (1 - pt) / draws));
  }
}

TEST_CASE("top level absorbs the tail when columns are few") {
  FieldSpec f = FieldSpec::prime_field(2);
  HashPlan plan(5, 1, 4, {0.0});
  const int draws = 200000;
  int top = 0;
  for (uint64_t v = 0; v < draws; ++v) {
    uint32_t lev = plan.assign(f, v).level;
    REQUIRE(lev < 4);
    top += lev == 3;
  }
  // P(level >= 3) = 2^-2
  double p = 0.25;
  CHECK(std::abs(top / double(draws) - p) < 5 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("rows are chi-square uniform") {
  FieldSpec f = FieldSpec::prime_field(2);
  HashPlan plan(9, 101, 64);
  std::vector<int> counts(101, 0);
  const int draws = 1000000;
  for (uint64_t v = 0; v < draws; ++v) ++counts[plan.assign(f, v).row];
  double expected = draws / 101.0, stat = 0;
  for (int c : counts) stat += (c - expected) * (c - expected) / expected;
  CHECK(stat < 182.13);  // chi2(1 - 1e-6, df=100)
}

TEST_CASE("level deviate U passes Kolmogorov-Smirnov against Uniform(0,1]") {
  const int n = 1000000;
  uint64_t key = mix64(0x1d);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    u[i] = static_cast<double>((prf128(key, i).hi >> 11) + 1) * 0x1p-53;
  }
  std::sort(u.begin(), u.end());
  double d = 0;
  for (int i = 0; i < n; ++i) {
    d = std::max(d, std::abs(u[i] - (i + 1.0) / n));
    d = std::max(d, std::abs(u[i] - double(i) / n));
  }
  CHECK(d < 0.0026934);  // KS critical value, alpha = 1e-6, n = 1e6
}

TEST_CASE("offsets are uniform and reproducible") {
  std::vector<double> off = derive_offsets(123, 100000);
  CHECK(off == derive_offsets(123, 100000));
  CHECK(off != derive_offsets(124, 100000));
  std::sort(off.begin(), off.end());
  double d = 0;
  int n = static_cast<int>(off.size());
  for (int i = 0; i < n; ++i) {
    REQUIRE(off[i] >= 0.0);
    REQUIRE(off[i] < 1.0);
    d = std::max(d, std::abs(off[i] - (i + 1.0) / n));
    d = std::max(d, std::abs(off[i] - double(i) / n));
  }
  CHECK(d < 0.0085172);  // KS critical value, alpha = 1e-6, n = 1e5
}

TEST_CASE("g values are uniform and independent of the level") {
  FieldSpec f = FieldSpec::binary_field(8);
  HashPlan plan(31, 16, 64);
  const int draws = 1000000;
  std::vector<int> counts(256, 0);
  double sum_g = 0, sum_l = 0, sum_gg = 0, sum_ll = 0, sum_gl = 0;
  for (uint64_t v = 0; v < draws; ++v) {
    CellAssignment a = plan.assign(f, v);
    ++counts[a.g_value.value];
    double g = static_cast<double>(a.g_value.value);
    double l = static_cast<double>(a.level);
    sum_g += g;
    sum_l += l;
    sum_gg += g * g;
    sum_ll += l * l;
    sum_gl += g * l;
  }
  double expected = draws / 256.0, stat = 0;
  for (int c : counts) stat += (c - expected) * (c - expected) / expected;
  CHECK(stat < 377.08);  // chi2(1 - 1e-6, df=255)

  double n = draws;
  double cov = sum_gl / n - (sum_g / n) * (sum_l / n);
  double vg = sum_gg / n - (sum_g / n) * (sum_g / n);
  double vl = sum_ll / n - (sum_l / n) * (sum_l / n);
  CHECK(std::abs(cov / std::sqrt(vg * vl)) < 0.01);

  // odd-characteristic g path
  FieldSpec f5 = FieldSpec::prime_field(5);
  std::vector<int> c5(5, 0);
  for (uint64_t v = 0; v < draws; ++v) ++c5[plan.assign(f5, v).g_value.value];
  double e5 = draws / 5.0, s5 = 0;
  for (int c : c5) s5 += (c - e5) * (c - e5) / e5;
  CHECK(s5 < 33.38);  // chi2(1 - 1e-6, df=4)
}

TEST_CASE("golden assignments pin the hash pipeline") {
  // Frozen outputs of plan(seed, 64, 64).assign(gf(2^8), element). Any change
  // here invalidates every serialized sketch in the wild.
  struct Pin {
    uint64_t seed, element;
    uint32_t row, level;
    uint64_t g;
  };
  const Pin pins[] = {
      {1ull, 0ull, 33, 0, 0x37},
      {1ull, 1ull, 5, 0, 0x72},
      {1ull, 2ull, 12, 1, 0xd2},
      {42ull, 0ull, 27, 1, 0x6b},
      {42ull, 12345ull, 32, 0, 0x8c},
      {42ull, 3735928559ull, 1, 1, 0xd6},
      {0ull, 7ull, 38, 0, 0x52},
      {18446744073709551615ull, 7ull, 62, 6, 0x38},
      {1234567ull, 1099511627776ull, 46, 3, 0xd3},
      {99ull, 81985529216486895ull, 8, 1, 0x19},
  };
  FieldSpec f = FieldSpec::binary_field(8);
  for (const Pin& p : pins) {
    HashPlan plan(p.seed, 64, 64);
    CellAssignment a = plan.assign(f, p.element);
    CHECK(a.row == p.row);
    CHECK(a.level == p.level);
    CHECK(a.g_value.value == p.g);
  }
  CHECK(derive_offsets(42, 4)[0] == doctest::Approx(0.5541060445182755).epsilon(1e-15));
  CHECK(hash_token(1, "alpha") == 3099809552856905589ull);
  CHECK(hash_token(1, "") == 14853901716895766981ull);
  CHECK(hash_token(2, "item 17") == 7072855218333430929ull);
}

TEST_CASE("token hashing is keyed, stable, and collision-free on small sets") {
  CHECK(hash_token(7, "alpha") == hash_token(7, "alpha"));
  CHECK(hash_token(7, "alpha") != hash_token(8, "alpha"));
  CHECK(hash_token(7, "alpha") != hash_token(7, "alphb"));
  CHECK(hash_token(7, "") != hash_token(7, std::string_view("\0", 1)));
  std::vector<uint64_t> ids;
  for (int i = 0; i < 20000; ++i) {
    ids.push_back(hash_token(3, "token-" + std::to_string(i)));
  }
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}
