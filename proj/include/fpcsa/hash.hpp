#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fpcsa/field.hpp"

namespace fpcsa {

struct Mix128 {
  uint64_t lo = 0;
  uint64_t hi = 0;
};

// splitmix64 finalizer: full-avalanche 64-bit scrambler.
uint64_t mix64(uint64_t z);

// Keyed non-cryptographic PRF with two decorrelated 64-bit lanes.
Mix128 prf128(uint64_t key, uint64_t x);

struct CellAssignment {
  uint32_t row;
  uint32_t level;
  FieldElement g_value;
};

// Per-sketch randomness: row hash, level deviate, value hash g, and the
// per-row offsets, all derived from one 64-bit seed. Equal (seed, rows,
// columns) plans assign identically.
//
// Given row i with offset t = offsets()[i], the level of an element is
// ceil(log2(1/U) - t) clamped to [0, columns-1], with U uniform on (0, 1]
// at 53-bit granularity. Hence P(level = j) = 2^(-j-t) for 1 <= j <=
// columns-2, level 0 absorbing the sub-unit mass and the top level the tail.
class HashPlan {
 public:
  HashPlan(uint64_t seed, uint32_t rows, uint32_t columns);
  // Test hook: explicit offsets (each in [0,1), one per row). Plans built
  // this way cannot be reconstructed from the seed alone.
  HashPlan(uint64_t seed, uint32_t rows, uint32_t columns,
           std::vector<double> offsets);

  uint64_t seed() const { return seed_; }
  uint32_t rows() const { return rows_; }
  uint32_t columns() const { return columns_; }
  const std::vector<double>& offsets() const { return offsets_; }

  CellAssignment assign(const FieldSpec& spec, uint64_t element) const;

 private:
  void finish_init();

  uint64_t seed_ = 0;
  uint32_t rows_ = 0;
  uint32_t columns_ = 0;
  uint64_t row_key_ = 0;
  uint64_t g_key_ = 0;
  std::vector<double> offsets_;
  std::vector<double> pow2_neg_offset_;  // exp2(-offset), hot-path cache
};

// The offsets a seed-only HashPlan derives: 53-bit uniform deviates in [0,1)
// from a keyed PRF stream.
std::vector<double> derive_offsets(uint64_t seed, uint32_t rows);

// 64-bit element id for a textual token, keyed by the sketch seed.
uint64_t hash_token(uint64_t seed, std::string_view token);

}  // namespace fpcsa
