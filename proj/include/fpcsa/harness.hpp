#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fpcsa/field.hpp"
#include "fpcsa/l0.hpp"

namespace fpcsa {

enum class Workload {
  // true_cardinality fresh ids, each inserted once with k = 1.
  distinct_inserts,
  // distinct_inserts plus a disjoint population of equal size that is
  // inserted and then deleted, leaving the net state unchanged.
  insert_delete_pairs,
  // fresh ids with signed values drawn uniformly from [value_min,
  // value_max] \ {0}, reduced into GF(p) for a scheme-selected prime p
  // (a fresh draw per trial). The config's field is ignored.
  zturnstile,
};

struct ExperimentConfig {
  FieldSpec field = FieldSpec::prime_field(2);
  uint32_t m = 64;
  uint32_t columns = 32;
  uint64_t true_cardinality = 100000;
  uint32_t trials = 100;
  uint64_t base_seed = 1;
  Workload workload = Workload::distinct_inserts;
  // zturnstile only:
  int64_t value_min = 1;
  int64_t value_max = 1000;
  std::optional<PrimeScheme> scheme;
};

struct LevelStat {
  int level = 0;
  double observed = 0;   // fraction of (trial, row) cells nonzero at this level
  double predicted = 0;  // mean of (1 - e^(-n m^-1 2^(-level-theta))) r over
                         // the realized offsets, n the field-reduced l0
  double sigma = 0;      // binomial standard deviation of `observed`
  uint64_t cells = 0;

  bool operator==(const LevelStat&) const = default;
};

// Every field is deterministic in the config; wall-clock measurements are
// deliberately kept out so identical configs produce identical reports.
struct ExperimentReport {
  uint32_t trials = 0;
  double mean_estimate = 0;
  double relative_bias = 0;    // mean estimate / integer l0 - 1
  double relative_stddev = 0;  // stddev of per-trial estimate / integer l0
  double predicted_relative_error = 0;  // mean rel_error_exact over trials
  double mean_true_l0 = 0;              // integer-turnstile ground truth
  double mean_field_l0 = 0;             // after prime reduction (zturnstile)
  double relative_bias_field = 0;       // vs field l0, zero-l0 trials skipped
  uint32_t uncalibrated_trials = 0;
  uint64_t total_updates = 0;
  std::vector<LevelStat> levels;  // one entry per column

  bool operator==(const ExperimentReport&) const = default;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// The per-level nonzero-rate law in a +-3 window around log2(n/m):
// distinct_inserts only.
std::vector<LevelStat> cell_law_check(const ExperimentConfig& cfg);

}  // namespace fpcsa
