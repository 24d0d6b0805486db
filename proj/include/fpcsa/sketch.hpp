#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fpcsa/constants.hpp"
#include "fpcsa/field.hpp"
#include "fpcsa/hash.hpp"

namespace fpcsa {

// Smoothed highest-nonzero-level positions, one per row: w = level + offset,
// with level = -1 standing in for a row whose cells are all zero.
struct HighestPositions {
  std::vector<double> w;
  uint32_t empty_rows = 0;
};

// calibrated is false when any row is empty: the estimator formula is only
// calibrated in the regime where every row has seen an element.
struct Estimate {
  double value = 0.0;
  bool calibrated = false;
};

// Linear distinct-count sketch: a rows x columns table of field elements.
// update(v, k) adds k*g(v) to the cell picked by the keyed hash of v, so the
// table depends only on the aggregate multiset of updates. Same-seed
// sketches merge cellwise into exactly the sketch of the concatenated
// stream. Cells are bit-packed at cell_bits() bits each, row-major.
//
// Single-writer: concurrent updates to one instance are unsupported. Build
// shard-per-thread with a shared seed and merge.
class Sketch {
 public:
  Sketch(const FieldSpec& spec, uint32_t rows, uint32_t columns,
         uint64_t seed);

  const FieldSpec& field() const { return spec_; }
  const HashPlan& plan() const { return plan_; }
  uint32_t rows() const { return plan_.rows(); }
  uint32_t columns() const { return plan_.columns(); }
  uint64_t seed() const { return plan_.seed(); }

  // Turnstile event (v, k): adds k*g(v) at (row(v), level(v)).
  void update(uint64_t element, FieldElement k);

  FieldElement cell(uint32_t row, uint32_t level) const;

  HighestPositions highest_positions() const;

  // norm_factor * 2^(mean of row positions); 0 for an all-empty sketch.
  // The constants must match this sketch's row count and field order.
  Estimate estimate(const EstimatorConstants& constants) const;

  std::vector<uint8_t> serialize() const;
  static Sketch deserialize(const uint8_t* data, size_t size);
  static Sketch deserialize(const std::vector<uint8_t>& bytes);

  bool operator==(const Sketch& other) const;

 private:
  friend Sketch merge(const Sketch& a, const Sketch& b);

  uint64_t get_cell(size_t index) const;
  void set_cell(size_t index, uint64_t value);

  FieldSpec spec_;
  HashPlan plan_;
  unsigned cell_bits_;
  uint64_t cell_mask_;
  std::vector<uint64_t> words_;
};

// Cellwise sum; both inputs must agree on field, rows, columns, and seed.
Sketch merge(const Sketch& a, const Sketch& b);

}  // namespace fpcsa
