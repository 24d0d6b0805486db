#include "fpcsa/harness.hpp"

#include <cmath>
#include <string>

#include "fpcsa/constants.hpp"
#include "fpcsa/errors.hpp"
#include "fpcsa/hash.hpp"
#include "fpcsa/sketch.hpp"

namespace fpcsa {

namespace {

constexpr uint64_t kTrialDomain = 0x747269616c736564ull;
constexpr uint64_t kValueDomain = 0x76616c7565647277ull;
constexpr uint64_t kPrimeDomain = 0x7072696d65647277ull;

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.true_cardinality < 1)
    throw ConfigError("true cardinality must be at least 1");
  if (cfg.true_cardinality > (uint64_t{1} << 38))
    throw ConfigError("true cardinality exceeds the per-trial id range");
  if (cfg.workload == Workload::zturnstile) {
    if (!cfg.scheme)
      throw ConfigError("zturnstile workload needs a prime scheme");
    if (cfg.value_min > cfg.value_max)
      throw ConfigError("value range is empty");
    if (cfg.value_min == 0 && cfg.value_max == 0)
      throw ConfigError("value range holds only zero");
    constexpr int64_t kBound = int64_t{1} << 62;
    if (cfg.value_min < -kBound || cfg.value_max > kBound)
      throw ConfigError("value range exceeds +-2^62");
  }
}

int64_t draw_value(uint64_t trial_seed, uint64_t& counter, int64_t lo,
                   int64_t hi) {
  uint64_t span = uint64_t(hi) - uint64_t(lo) + 1;  // wraps correctly
  for (;;) {
    uint64_t bits = prf128(trial_seed ^ kValueDomain, counter++).lo;
    int64_t v = lo + int64_t(uint64_t((unsigned __int128)bits * span >> 64));
    if (v != 0) return v;
  }
}

struct Accumulator {
  double sum = 0, sum_sq = 0;
  void push(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(uint32_t n) const { return sum / n; }
  double stddev(uint32_t n) const {
    double m = mean(n);
    return std::sqrt(std::max(0.0, sum_sq / n - m * m));
  }
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const uint64_t n0 = cfg.true_cardinality;
  ExperimentReport report;
  report.trials = cfg.trials;
  report.levels.assign(cfg.columns, LevelStat{});
  for (uint32_t j = 0; j < cfg.columns; ++j) report.levels[j].level = int(j);
  std::vector<double> q_sum(cfg.columns, 0), q_var(cfg.columns, 0);
  std::vector<uint64_t> nonzero(cfg.columns, 0);

  Accumulator ratio_z, ratio_field;
  double estimate_sum = 0;
  double true_l0_sum = 0, field_l0_sum = 0, predicted_sum = 0;
  uint32_t field_ratio_trials = 0;

  for (uint32_t t = 0; t < cfg.trials; ++t) {
    uint64_t trial_seed = prf128(cfg.base_seed, kTrialDomain ^ t).lo;
    uint64_t id_base = uint64_t(t) << 40;

    FieldSpec spec = cfg.field;
    if (cfg.workload == Workload::zturnstile) {
      PrimeScheme scheme =
          cfg.scheme->with_seed(prf128(trial_seed, kPrimeDomain).lo);
      spec = FieldSpec::prime_field(select_prime(scheme));
    }
    Sketch sketch(spec, cfg.m, cfg.columns, trial_seed);

    uint64_t true_l0 = n0;
    uint64_t field_l0 = n0;
    switch (cfg.workload) {
      case Workload::distinct_inserts: {
        FieldElement one = spec.one();
        for (uint64_t i = 0; i < n0; ++i) sketch.update(id_base + i, one);
        break;
      }
      case Workload::insert_delete_pairs: {
        FieldElement one = spec.one();
        FieldElement minus_one = spec.neg(one);
        for (uint64_t i = 0; i < n0; ++i) sketch.update(id_base + i, one);
        uint64_t ghost_base = id_base + (uint64_t{1} << 39);
        for (uint64_t i = 0; i < n0; ++i) {
          sketch.update(ghost_base + i, one);
          sketch.update(ghost_base + i, minus_one);
        }
        report.total_updates += 2 * n0;
        break;
      }
      case Workload::zturnstile: {
        uint64_t counter = 0;
        field_l0 = 0;
        for (uint64_t i = 0; i < n0; ++i) {
          int64_t v =
              draw_value(trial_seed, counter, cfg.value_min, cfg.value_max);
          FieldElement k = spec.embed_integer(v);
          field_l0 += k.value != 0;
          sketch.update(id_base + i, k);
        }
        break;
      }
    }
    report.total_updates += n0;

    const EstimatorConstants& constants = constants_for(cfg.m, spec.order());
    Estimate estimate = sketch.estimate(constants);
    report.uncalibrated_trials += !estimate.calibrated;
    estimate_sum += estimate.value;
    predicted_sum += constants.rel_error_exact;
    true_l0_sum += double(true_l0);
    field_l0_sum += double(field_l0);
    ratio_z.push(estimate.value / double(true_l0));
    if (field_l0 > 0) {
      ratio_field.push(estimate.value / double(field_l0));
      ++field_ratio_trials;
    }

    const std::vector<double>& offsets = sketch.plan().offsets();
    double scale = double(field_l0) / cfg.m;
    for (uint32_t i = 0; i < cfg.m; ++i) {
      for (uint32_t j = 0; j < cfg.columns; ++j) {
        nonzero[j] += sketch.cell(i, j).value != 0;
        double q = -std::expm1(-scale * std::exp2(-double(j) - offsets[i])) *
                   constants.r;
        q_sum[j] += q;
        q_var[j] += q * (1 - q);
      }
    }
  }

  uint64_t cells = uint64_t(cfg.trials) * cfg.m;
  for (uint32_t j = 0; j < cfg.columns; ++j) {
    report.levels[j].cells = cells;
    report.levels[j].observed = double(nonzero[j]) / double(cells);
    report.levels[j].predicted = q_sum[j] / double(cells);
    report.levels[j].sigma = std::sqrt(q_var[j]) / double(cells);
  }
  report.mean_estimate = estimate_sum / cfg.trials;
  report.mean_true_l0 = true_l0_sum / cfg.trials;
  report.mean_field_l0 = field_l0_sum / cfg.trials;
  report.predicted_relative_error = predicted_sum / cfg.trials;
  report.relative_bias = ratio_z.mean(cfg.trials) - 1.0;
  report.relative_stddev = ratio_z.stddev(cfg.trials);
  report.relative_bias_field =
      field_ratio_trials ? ratio_field.mean(field_ratio_trials) - 1.0 : 0.0;
  return report;
}

std::vector<LevelStat> cell_law_check(const ExperimentConfig& cfg) {
  if (cfg.workload != Workload::distinct_inserts)
    throw UsageError("the cell law is checked on the distinct-inserts workload");
  ExperimentReport report = run_experiment(cfg);
  double center = std::log2(double(cfg.true_cardinality) / cfg.m);
  std::vector<LevelStat> window;
  for (const LevelStat& stat : report.levels)
    if (std::abs(stat.level - center) <= 3.0) window.push_back(stat);
  return window;
}

}  // namespace fpcsa
