#include "fpcsa/hash.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "fpcsa/errors.hpp"

namespace fpcsa {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;
constexpr uint64_t kRowDomain = 0xa0761d6478bd642full;
constexpr uint64_t kValueDomain = 0xe7037ed1a0b428dbull;
constexpr uint64_t kOffsetDomain = 0x8ebc6af09c88c6e3ull;
constexpr uint64_t kTokenDomain = 0x589965cc75374cc3ull;
constexpr uint64_t kLaneSalt = 0x6a09e667f3bcc909ull;

// exp2(e) for e in [0, 54]; exact in double.
const std::array<double, 55>& pow2_table() {
  static const std::array<double, 55> t = [] {
    std::array<double, 55> a{};
    for (int e = 0; e <= 54; ++e) a[e] = std::ldexp(1.0, e);
    return a;
  }();
  return t;
}

double unit_deviate(uint64_t bits) {
  // 53-bit uniform in [0, 1).
  return static_cast<double>(bits >> 11) * 0x1p-53;
}

}  // namespace

uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

Mix128 prf128(uint64_t key, uint64_t x) {
  // Golden-ratio spread first so structured inputs (sequential ids) feed the
  // finalizer the same way splitmix64 does.
  uint64_t a = x * kGolden;
  return {mix64(a ^ key), mix64(a + (key ^ kLaneSalt))};
}

std::vector<double> derive_offsets(uint64_t seed, uint32_t rows) {
  uint64_t key = mix64(seed ^ kOffsetDomain);
  std::vector<double> offsets(rows);
  for (uint32_t i = 0; i < rows; ++i) {
    offsets[i] = unit_deviate(prf128(key, i).hi);
  }
  return offsets;
}

uint64_t hash_token(uint64_t seed, std::string_view token) {
  uint64_t h = mix64(seed ^ kTokenDomain);
  for (unsigned char c : token) {
    h = mix64((h + c) * kGolden);
  }
  return mix64(h ^ (static_cast<uint64_t>(token.size()) * kGolden));
}

HashPlan::HashPlan(uint64_t seed, uint32_t rows, uint32_t columns)
    : seed_(seed), rows_(rows), columns_(columns),
      offsets_(derive_offsets(seed, rows)) {
  finish_init();
}

HashPlan::HashPlan(uint64_t seed, uint32_t rows, uint32_t columns,
                   std::vector<double> offsets)
    : seed_(seed), rows_(rows), columns_(columns), offsets_(std::move(offsets)) {
  if (offsets_.size() != rows_)
    throw ConfigError("offset count does not match row count");
  for (double t : offsets_) {
    if (!(t >= 0.0 && t < 1.0))
      throw ConfigError("offsets must lie in [0, 1)");
  }
  finish_init();
}

void HashPlan::finish_init() {
  if (rows_ == 0) throw ConfigError("row count must be positive");
  if (columns_ < 1 || columns_ > 64)
    throw ConfigError("column count must be in [1, 64]");
  row_key_ = mix64(seed_ ^ kRowDomain);
  g_key_ = mix64(seed_ ^ kValueDomain);
  pow2_neg_offset_.resize(rows_);
  for (uint32_t i = 0; i < rows_; ++i) {
    pow2_neg_offset_[i] = std::exp2(-offsets_[i]);
  }
}

CellAssignment HashPlan::assign(const FieldSpec& spec, uint64_t element) const {
  Mix128 h = prf128(row_key_, element);
  uint32_t row = static_cast<uint32_t>(
      (static_cast<uint64_t>(static_cast<uint32_t>(h.lo >> 32)) * rows_) >> 32);

  // level = ceil(-log2(U) - offset), U = u * 2^-53 with u in [1, 2^53]:
  // writing log2(u) = e + f, the ceil equals 53 - e - [u >= 2^(e+1-offset)].
  uint64_t u = (h.hi >> 11) + 1;
  unsigned e = static_cast<unsigned>(std::bit_width(u)) - 1;
  int level = 53 - static_cast<int>(e);
  if (static_cast<double>(u) >= pow2_table()[e + 1] * pow2_neg_offset_[row])
    --level;
  if (level < 0) level = 0;
  if (level >= static_cast<int>(columns_)) level = static_cast<int>(columns_) - 1;

  uint64_t g_bits = prf128(g_key_, element).lo;
  return {row, static_cast<uint32_t>(level), spec.sample_uniform(g_bits)};
}

}  // namespace fpcsa
