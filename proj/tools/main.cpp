#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpcsa/constants.hpp"
#include "fpcsa/errors.hpp"
#include "fpcsa/field.hpp"
#include "fpcsa/harness.hpp"
#include "fpcsa/hash.hpp"
#include "fpcsa/l0.hpp"
#include "fpcsa/sketch.hpp"
#include "fpcsa/stream_io.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace fpcsa;

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open file " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw UsageError("failed to write " + path);
}

std::ifstream open_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open stream file " + path);
  return in;
}

// ---------------------------------------------------------------------------
// prime-selection flags, shared by `build` and `primes select`

struct SchemeArgs {
  std::string kind;  // infinity | average | fixed
  double epsilon = 0;
  uint64_t linf = 0;
  double avg = 0;
  uint64_t p = 0;
  uint64_t seed = 0;
  bool has_epsilon = false;
  bool has_linf = false;
  bool has_avg = false;
  bool has_p = false;
};

void add_scheme_options(CLI::App& cmd, SchemeArgs& args, bool require_kind,
                        const std::string& seed_flag) {
  auto* kind =
      cmd.add_option("--scheme", args.kind,
                     "prime-selection scheme: infinity, average, or fixed")
          ->check(CLI::IsMember({"infinity", "average", "fixed"}));
  if (require_kind) kind->required();
  cmd.add_option("--epsilon", args.epsilon,
                 "relative distinct-count error the scheme tolerates")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--linf", args.linf,
                 "bound on the largest counter magnitude (infinity scheme)");
  cmd.add_option("--avg", args.avg,
                 "bound on mean nonzero magnitude (average scheme)");
  cmd.add_option("--p", args.p, "the prime itself (fixed scheme)");
  cmd.add_option(seed_flag, args.seed,
                 "seed for the uniform draw from the candidate set");
}

void capture_scheme_presence(const CLI::App& cmd, SchemeArgs& args) {
  args.has_epsilon = cmd.count("--epsilon") > 0;
  args.has_linf = cmd.count("--linf") > 0;
  args.has_avg = cmd.count("--avg") > 0;
  args.has_p = cmd.count("--p") > 0;
}

// Bounds must already be resolved (an empty optional means the caller wants a
// measuring prepass and should not be here).
PrimeScheme make_scheme(const SchemeArgs& args) {
  if (args.kind == "fixed") {
    if (!args.has_p) throw UsageError("fixed scheme needs --p");
    if (args.has_epsilon || args.has_linf || args.has_avg)
      throw UsageError("fixed scheme takes only --p");
    return PrimeScheme::fixed(args.p);
  }
  if (!args.has_epsilon)
    throw UsageError(args.kind + " scheme needs --epsilon");
  if (args.has_p) throw UsageError("--p only applies to the fixed scheme");
  if (args.kind == "infinity") {
    if (args.has_avg)
      throw UsageError("--avg only applies to the average scheme");
    if (!args.has_linf) throw UsageError("infinity scheme needs --linf");
    return PrimeScheme::infinity_norm(args.epsilon, args.linf, args.seed);
  }
  if (args.has_linf)
    throw UsageError("--linf only applies to the infinity scheme");
  if (!args.has_avg) throw UsageError("average scheme needs --avg");
  return PrimeScheme::average_norm(args.epsilon, args.avg, args.seed);
}

std::string describe_scheme(const SchemeArgs& args) {
  char buf[128];
  if (args.kind == "fixed") {
    std::snprintf(buf, sizeof buf, "fixed(p=%" PRIu64 ")", args.p);
  } else if (args.kind == "infinity") {
    std::snprintf(buf, sizeof buf,
                  "infinity_norm(epsilon=%g, linf=%" PRIu64 ")", args.epsilon,
                  args.linf);
  } else {
    std::snprintf(buf, sizeof buf, "average_norm(epsilon=%g, avg=%g)",
                  args.epsilon, args.avg);
  }
  return buf;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
  std::string stream_path;
  std::string out_path;
  uint32_t m = 0;
  uint32_t columns = 32;
  uint64_t seed = 1;
  std::string field_text;
  std::string reduce_text;
  SchemeArgs scheme;
  bool scheme_seed_given = false;
};

// Streams the whole file once to measure the norm the scheme needs a bound
// for. Token ids use the sketch seed, matching the build pass.
void measure_bound(const BuildArgs& a, SchemeArgs& scheme) {
  auto in = open_stream(a.stream_path);
  StreamReader reader(in);
  ExactState state;
  StreamEvent e;
  while (reader.next(e)) {
    uint64_t id = e.is_token ? hash_token(a.seed, e.token) : e.id;
    state.add(id, e.value);
  }
  if (scheme.kind == "infinity") {
    scheme.linf = state.linf() > 0 ? state.linf() : 1;
    scheme.has_linf = true;
  } else {
    scheme.avg =
        state.l0() > 0 ? double(state.l1()) / double(state.l0()) : 2.0;
    scheme.has_avg = true;
  }
}

int cmd_build(BuildArgs& a) {
  bool z_mode = false;
  std::optional<FieldSpec> header_field;
  {
    auto in = open_stream(a.stream_path);
    StreamReader reader(in);
    z_mode = reader.z_mode();
    header_field = reader.field();
  }

  bool has_scheme = !a.scheme.kind.empty();
  FieldSpec field = FieldSpec::prime_field(2);
  std::string scheme_line;
  std::string prime_line;
  if (z_mode) {
    if (a.reduce_text.empty() == !has_scheme)
      throw UsageError(
          "an integer stream needs exactly one of --reduce or --scheme");
    if (!a.field_text.empty())
      throw UsageError("--field does not apply to integer streams; "
                       "use --reduce or --scheme");
    if (!a.reduce_text.empty()) {
      field = FieldSpec::parse(a.reduce_text);
      if (field.degree() != 1)
        throw UsageError("reduction field must be gf(p) for a prime p, got " +
                         field.to_string());
    } else {
      if (!a.scheme_seed_given) a.scheme.seed = a.seed;
      bool needs_prepass = (a.scheme.kind == "infinity" && !a.scheme.has_linf) ||
                           (a.scheme.kind == "average" && !a.scheme.has_avg);
      if (needs_prepass) measure_bound(a, a.scheme);
      PrimeScheme scheme = make_scheme(a.scheme);
      uint64_t p = select_prime(scheme);
      field = FieldSpec::prime_field(p);
      scheme_line = "scheme: " + describe_scheme(a.scheme);
      char buf[64];
      std::snprintf(buf, sizeof buf, "prime: %" PRIu64 " (set of %zu)", p,
                    scheme.prime_set().size());
      prime_line = buf;
    }
  } else {
    if (!a.reduce_text.empty() || has_scheme)
      throw UsageError("--reduce and --scheme only apply to integer streams");
    field = *header_field;
    if (!a.field_text.empty()) {
      FieldSpec requested = FieldSpec::parse(a.field_text);
      if (!(requested == field))
        throw UsageError("stream field " + field.to_string() +
                         " does not match --field " + requested.to_string());
    }
  }

  Sketch sketch(field, a.m, a.columns, a.seed);
  uint64_t updates = 0;
  {
    auto in = open_stream(a.stream_path);
    StreamReader reader(in);
    StreamEvent e;
    while (reader.next(e)) {
      uint64_t id = e.is_token ? hash_token(a.seed, e.token) : e.id;
      FieldElement k =
          z_mode ? field.embed_integer(e.value) : field.element(e.element);
      sketch.update(id, k);
      ++updates;
    }
  }
  write_file_bytes(a.out_path, sketch.serialize());

  std::printf("built: %s\n", a.out_path.c_str());
  std::printf("field: %s\n", field.to_string().c_str());
  if (!scheme_line.empty()) {
    std::printf("%s\n", scheme_line.c_str());
    std::printf("%s\n", prime_line.c_str());
  }
  std::printf("m: %u\n", a.m);
  std::printf("columns: %u\n", a.columns);
  std::printf("seed: %" PRIu64 "\n", a.seed);
  std::printf("updates: %" PRIu64 "\n", updates);
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const std::string& path) {
  Sketch sketch = Sketch::deserialize(read_file_bytes(path));
  const EstimatorConstants& c =
      constants_for(sketch.rows(), sketch.field().order());
  Estimate est = sketch.estimate(c);
  std::printf("estimate: %.10g\n", est.value);
  std::printf("m: %u\n", sketch.rows());
  std::printf("columns: %u\n", sketch.columns());
  std::printf("field: %s\n", sketch.field().to_string().c_str());
  std::printf("seed: %" PRIu64 "\n", sketch.seed());
  std::printf("relative_error: %.6g\n", c.rel_error_exact);
  std::printf("calibrated: %s\n", est.calibrated ? "yes" : "no");
  return 0;
}

// ---------------------------------------------------------------------------
// merge

int cmd_merge(const std::string& a_path, const std::string& b_path,
              const std::string& out_path) {
  Sketch a = Sketch::deserialize(read_file_bytes(a_path));
  Sketch b = Sketch::deserialize(read_file_bytes(b_path));
  Sketch merged = merge(a, b);
  write_file_bytes(out_path, merged.serialize());
  std::printf("merged: %s\n", out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// constants

int cmd_constants_table(bool csv) {
  struct Row {
    const char* label;
    uint64_t order;
  };
  constexpr Row kRows[] = {{"2", 2},      {"3", 3},
                           {"4", 4},      {"5", 5},
                           {"7", 7},      {"8", 8},
                           {"9", 9},      {"2^8", 256},
                           {"2^32", uint64_t(1) << 32}};
  constexpr uint32_t kProxyM = 1000000;
  if (csv) {
    std::printf("order,psi_mean,psi_variance,norm_per_m,rel_sqrt_m\n");
  } else {
    std::printf("%-8s%10s%14s%12s%12s\n", "order", "psi_mean", "psi_variance",
                "norm_per_m", "rel_sqrt_m");
  }
  for (const Row& row : kRows) {
    const EstimatorConstants& c = constants_for(kProxyM, row.order);
    std::printf(csv ? "%s,%.4f,%.4f,%.4f,%.4f\n"
                    : "%-8s%10.4f%14.4f%12.4f%12.4f\n",
                row.label, c.psi_mean, c.psi_variance,
                c.norm_factor / double(kProxyM),
                c.rel_error_exact * std::sqrt(double(kProxyM)));
  }
  return 0;
}

int cmd_constants_single(const std::string& field_text, uint64_t order,
                         uint32_t m, bool csv) {
  if (!field_text.empty()) {
    if (order != 0) throw UsageError("give --field or --order, not both");
    order = FieldSpec::parse(field_text).order();
  } else if (order == 0) {
    throw UsageError("constants needs --table, --field, or --order");
  }
  const EstimatorConstants& c = constants_for(m, order);
  if (csv) {
    std::printf("m,field_order,r,phi_1_over_m,phi_2_over_m,norm_factor,"
                "psi_mean,psi_variance,rel_error_exact,"
                "rel_error_asymptotic\n");
    std::printf("%u,%" PRIu64 ",%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                "%.10g\n",
                c.m, c.field_order, c.r, c.phi_1m, c.phi_2m, c.norm_factor,
                c.psi_mean, c.psi_variance, c.rel_error_exact,
                c.rel_error_asymptotic);
    return 0;
  }
  std::printf("m: %u\n", c.m);
  std::printf("field_order: %" PRIu64 "\n", c.field_order);
  std::printf("r: %.10g\n", c.r);
  std::printf("phi_1_over_m: %.10g\n", c.phi_1m);
  std::printf("phi_2_over_m: %.10g\n", c.phi_2m);
  std::printf("norm_factor: %.10g\n", c.norm_factor);
  std::printf("psi_mean: %.10g\n", c.psi_mean);
  std::printf("psi_variance: %.10g\n", c.psi_variance);
  std::printf("rel_error_exact: %.10g\n", c.rel_error_exact);
  std::printf("rel_error_asymptotic: %.10g\n", c.rel_error_asymptotic);
  return 0;
}

// ---------------------------------------------------------------------------
// exact

int cmd_exact(const std::string& stream_path, const std::string& field_text) {
  auto in = open_stream(stream_path);
  StreamReader reader(in);
  StreamEvent e;
  if (reader.z_mode()) {
    // Token ids only need to be consistent within the file, so the keyed hash
    // runs with a fixed seed of zero here.
    ExactState state;
    while (reader.next(e)) {
      uint64_t id = e.is_token ? hash_token(0, e.token) : e.id;
      state.add(id, e.value);
    }
    std::printf("l0: %" PRIu64 "\n", state.l0());
    std::printf("l1: %" PRIu64 "\n", state.l1());
    std::printf("linf: %" PRIu64 "\n", state.linf());
    if (!field_text.empty()) {
      FieldSpec field = FieldSpec::parse(field_text);
      std::printf("l0_%s: %" PRIu64 "\n", field.to_string().c_str(),
                  state.l0_mod(field));
    }
    return 0;
  }
  if (!field_text.empty())
    throw UsageError("--field only applies to integer streams; this one is "
                     "already over " +
                     reader.field()->to_string());
  FieldExactState state(*reader.field());
  const FieldSpec& field = state.field();
  while (reader.next(e)) {
    uint64_t id = e.is_token ? hash_token(0, e.token) : e.id;
    state.add(id, field.element(e.element));
  }
  std::printf("l0: %" PRIu64 "\n", state.l0());
  return 0;
}

// ---------------------------------------------------------------------------
// primes select

int cmd_primes_select(SchemeArgs& args) {
  PrimeScheme scheme = make_scheme(args);
  std::printf("prime: %" PRIu64 "\n", select_prime(scheme));
  std::printf("set_size: %zu\n", scheme.prime_set().size());
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const char* what) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw UsageError(std::string("unknown ") + what + " key '" +
                       item.key() + "'");
  }
}

struct CheckSpec {
  std::string kind;
  double multiple = 3.0;     // bias_within_se
  double tolerance = 0.15;   // stddev_matches_prediction
  std::optional<double> target;
  double sigmas = 5.0;       // cell_law
  double window = 3.0;
};

struct SimExperiment {
  std::string name;
  ExperimentConfig cfg;
  std::vector<CheckSpec> checks;
};

PrimeScheme parse_scheme_json(const json& j) {
  require_keys(j, {"kind", "epsilon", "linf", "avg", "p", "seed"}, "scheme");
  std::string kind = j.at("kind").get<std::string>();
  uint64_t seed = j.value("seed", uint64_t(0));
  if (kind == "fixed") return PrimeScheme::fixed(j.at("p").get<uint64_t>());
  double epsilon = j.at("epsilon").get<double>();
  if (kind == "infinity")
    return PrimeScheme::infinity_norm(epsilon, j.at("linf").get<uint64_t>(),
                                      seed);
  if (kind == "average")
    return PrimeScheme::average_norm(epsilon, j.at("avg").get<double>(), seed);
  throw UsageError("unknown scheme kind '" + kind + "'");
}

SimExperiment parse_experiment(const json& j, size_t index) {
  require_keys(j,
               {"name", "field", "m", "columns", "true_cardinality", "trials",
                "base_seed", "workload", "value_min", "value_max", "scheme",
                "checks"},
               "experiment");
  SimExperiment exp;
  exp.name = j.value("name", "experiment-" + std::to_string(index));
  ExperimentConfig& cfg = exp.cfg;
  if (j.contains("field"))
    cfg.field = FieldSpec::parse(j.at("field").get<std::string>());
  if (j.contains("m")) cfg.m = j.at("m").get<uint32_t>();
  if (j.contains("columns")) cfg.columns = j.at("columns").get<uint32_t>();
  if (j.contains("true_cardinality"))
    cfg.true_cardinality = j.at("true_cardinality").get<uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<uint32_t>();
  if (j.contains("base_seed"))
    cfg.base_seed = j.at("base_seed").get<uint64_t>();
  if (j.contains("workload")) {
    std::string w = j.at("workload").get<std::string>();
    if (w == "distinct_inserts") {
      cfg.workload = Workload::distinct_inserts;
    } else if (w == "insert_delete_pairs") {
      cfg.workload = Workload::insert_delete_pairs;
    } else if (w == "zturnstile") {
      cfg.workload = Workload::zturnstile;
    } else {
      throw UsageError("unknown workload '" + w + "'");
    }
  }
  if (j.contains("value_min"))
    cfg.value_min = j.at("value_min").get<int64_t>();
  if (j.contains("value_max"))
    cfg.value_max = j.at("value_max").get<int64_t>();
  if (j.contains("scheme")) cfg.scheme = parse_scheme_json(j.at("scheme"));
  if (j.contains("checks")) {
    for (const json& cj : j.at("checks")) {
      require_keys(
          cj, {"kind", "multiple", "tolerance", "target", "sigmas", "window"},
          "check");
      CheckSpec check;
      check.kind = cj.at("kind").get<std::string>();
      check.multiple = cj.value("multiple", check.multiple);
      check.tolerance = cj.value("tolerance", check.tolerance);
      if (cj.contains("target")) check.target = cj.at("target").get<double>();
      check.sigmas = cj.value("sigmas", check.sigmas);
      check.window = cj.value("window", check.window);
      if (check.kind != "bias_within_se" &&
          check.kind != "stddev_matches_prediction" &&
          check.kind != "cell_law")
        throw UsageError("unknown check kind '" + check.kind + "'");
      exp.checks.push_back(check);
    }
  }
  return exp;
}

json level_json(const LevelStat& s) {
  return {{"level", s.level},
          {"observed", s.observed},
          {"predicted", s.predicted},
          {"sigma", s.sigma},
          {"cells", s.cells}};
}

json report_json(const ExperimentReport& r) {
  json levels = json::array();
  for (const LevelStat& s : r.levels) levels.push_back(level_json(s));
  return {{"trials", r.trials},
          {"mean_estimate", r.mean_estimate},
          {"relative_bias", r.relative_bias},
          {"relative_stddev", r.relative_stddev},
          {"predicted_relative_error", r.predicted_relative_error},
          {"mean_true_l0", r.mean_true_l0},
          {"mean_field_l0", r.mean_field_l0},
          {"relative_bias_field", r.relative_bias_field},
          {"uncalibrated_trials", r.uncalibrated_trials},
          {"total_updates", r.total_updates},
          {"levels", std::move(levels)}};
}

json evaluate_check(const CheckSpec& check, const ExperimentConfig& cfg,
                    const ExperimentReport& r) {
  json out{{"kind", check.kind}};
  bool pass = false;
  if (check.kind == "bias_within_se") {
    double bound =
        check.multiple * r.relative_stddev / std::sqrt(double(r.trials));
    pass = std::abs(r.relative_bias) <= bound;
    out["observed"] = std::abs(r.relative_bias);
    out["bound"] = bound;
  } else if (check.kind == "stddev_matches_prediction") {
    double target = check.target.value_or(r.predicted_relative_error);
    double deviation = std::abs(r.relative_stddev / target - 1.0);
    pass = deviation <= check.tolerance;
    out["observed"] = deviation;
    out["bound"] = check.tolerance;
    out["target"] = target;
  } else {  // cell_law
    if (cfg.workload != Workload::distinct_inserts)
      throw UsageError("cell_law checks need the distinct_inserts workload");
    double center = std::log2(double(cfg.true_cardinality) / double(cfg.m));
    double worst = 0;
    int worst_level = -1;
    uint32_t in_window = 0;
    for (const LevelStat& s : r.levels) {
      if (std::abs(double(s.level) - center) > check.window) continue;
      ++in_window;
      double z = std::abs(s.observed - s.predicted) / s.sigma;
      if (z > worst) {
        worst = z;
        worst_level = s.level;
      }
    }
    pass = in_window > 0 && worst <= check.sigmas;
    out["observed"] = worst;
    out["bound"] = check.sigmas;
    out["worst_level"] = worst_level;
    out["levels_in_window"] = in_window;
  }
  out["pass"] = pass;
  return out;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot open config file " + config_path);
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(),
                      e.byte);
  }

  std::vector<SimExperiment> experiments;
  try {
    if (config.is_object() && config.contains("experiments")) {
      require_keys(config, {"experiments"}, "config");
      size_t i = 0;
      for (const json& j : config.at("experiments"))
        experiments.push_back(parse_experiment(j, i++));
    } else {
      experiments.push_back(parse_experiment(config, 0));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  if (experiments.empty()) throw UsageError("config lists no experiments");

  json out{{"experiments", json::array()}};
  std::string csv =
      "name,trials,mean_estimate,relative_bias,relative_stddev,"
      "predicted_relative_error,mean_true_l0,mean_field_l0,"
      "relative_bias_field,uncalibrated_trials,total_updates,"
      "checks_passed,checks_total,pass\n";
  bool all_pass = true;
  for (const SimExperiment& exp : experiments) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report = run_experiment(exp.cfg);
    std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - t0;

    json checks = json::array();
    bool exp_pass = true;
    uint32_t checks_passed = 0;
    for (const CheckSpec& check : exp.checks) {
      json result = evaluate_check(check, exp.cfg, report);
      bool ok = result.at("pass").get<bool>();
      exp_pass = exp_pass && ok;
      if (ok) ++checks_passed;
      checks.push_back(std::move(result));
    }
    all_pass = all_pass && exp_pass;

    out["experiments"].push_back(
        {{"name", exp.name},
         {"report", report_json(report)},
         {"checks", std::move(checks)},
         {"pass", exp_pass},
         {"elapsed_seconds", elapsed.count()},
         {"updates_per_second",
          elapsed.count() > 0 ? double(report.total_updates) / elapsed.count()
                              : 0.0}});

    char row[512];
    std::snprintf(row, sizeof(row),
                  ",%u,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%u,%" PRIu64
                  ",%u,%zu,%s\n",
                  report.trials, report.mean_estimate, report.relative_bias,
                  report.relative_stddev, report.predicted_relative_error,
                  report.mean_true_l0, report.mean_field_l0,
                  report.relative_bias_field, report.uncalibrated_trials,
                  report.total_updates, checks_passed, exp.checks.size(),
                  exp_pass ? "true" : "false");
    csv += csv_field(exp.name);
    csv += row;
  }
  out["pass"] = all_pass;

  std::string text;
  if (format == "csv") {
    text = std::move(csv);
  } else {
    text = out.dump(2);
    text.push_back('\n');
  }
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream f(out_path, std::ios::trunc);
    if (!f) throw UsageError("cannot open file " + out_path + " for writing");
    f << text;
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mergeable distinct-count sketches over finite fields"};
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build = app.add_subcommand(
      "build", "stream a turnstile file into a new sketch");
  build->add_option("stream", build_args.stream_path, "input stream file")
      ->required();
  build->add_option("-o,--out", build_args.out_path, "output sketch file")
      ->required();
  build->add_option("--m", build_args.m, "number of rows")->required();
  build->add_option("--columns", build_args.columns,
                    "levels per row (default 32)");
  build->add_option("--seed", build_args.seed, "hash seed (default 1)");
  build->add_option("--field", build_args.field_text,
                    "expected field, checked against the stream header");
  build->add_option("--reduce", build_args.reduce_text,
                    "reduce an integer stream into this prime field");
  add_scheme_options(*build, build_args.scheme, false, "--scheme-seed");

  auto* estimate =
      app.add_subcommand("estimate", "print the distinct-count estimate");
  std::string estimate_path;
  estimate->add_option("sketch", estimate_path, "sketch file")->required();

  auto* merge_cmd =
      app.add_subcommand("merge", "combine two sketches built alike");
  std::string merge_a, merge_b, merge_out;
  merge_cmd->add_option("a", merge_a, "first sketch")->required();
  merge_cmd->add_option("b", merge_b, "second sketch")->required();
  merge_cmd->add_option("-o,--out", merge_out, "output sketch file")
      ->required();

  auto* constants_cmd =
      app.add_subcommand("constants", "print estimator calibration numbers");
  bool constants_table = false;
  std::string constants_field;
  uint64_t constants_order = 0;
  uint32_t constants_m = 1000000;
  std::string constants_format = "text";
  constants_cmd->add_flag("--table", constants_table,
                          "print the calibration table for nine field orders");
  constants_cmd->add_option("--field", constants_field, "field, e.g. gf(2^8)");
  constants_cmd->add_option("--order", constants_order,
                            "field order alone (any integer >= 2)");
  constants_cmd->add_option("--m", constants_m,
                            "number of rows (default 1000000)");
  constants_cmd->add_option("--format", constants_format, "text or csv")
      ->check(CLI::IsMember({"text", "csv"}));

  auto* exact_cmd = app.add_subcommand(
      "exact", "exact stream norms from an in-memory counter table");
  std::string exact_stream, exact_field;
  exact_cmd->add_option("stream", exact_stream, "input stream file")
      ->required();
  exact_cmd->add_option("--field", exact_field,
                        "also count residues that survive mod p");

  auto* primes_cmd = app.add_subcommand("primes", "prime-selection utilities");
  primes_cmd->require_subcommand(1);
  auto* primes_select =
      primes_cmd->add_subcommand("select", "draw the reduction prime");
  SchemeArgs select_args;
  add_scheme_options(*primes_select, select_args, true, "--seed");

  auto* simulate = app.add_subcommand(
      "simulate", "run Monte Carlo experiments from a JSON config");
  std::string sim_config, sim_out;
  std::string sim_format = "json";
  simulate->add_option("config", sim_config, "JSON experiment config")
      ->required();
  simulate->add_option("-o,--out", sim_out,
                       "write the report here instead of stdout");
  simulate->add_option("--format", sim_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
    if (*build) {
      capture_scheme_presence(*build, build_args.scheme);
      build_args.scheme_seed_given = build->count("--scheme-seed") > 0;
      return cmd_build(build_args);
    }
    if (*estimate) return cmd_estimate(estimate_path);
    if (*merge_cmd) return cmd_merge(merge_a, merge_b, merge_out);
    if (*constants_cmd) {
      if (constants_table) {
        if (!constants_field.empty() || constants_order != 0)
          throw UsageError("--table does not combine with --field or --order");
        return cmd_constants_table(constants_format == "csv");
      }
      return cmd_constants_single(constants_field, constants_order, constants_m,
                                  constants_format == "csv");
    }
    if (*exact_cmd) return cmd_exact(exact_stream, exact_field);
    if (*primes_select) {
      capture_scheme_presence(*primes_select, select_args);
      return cmd_primes_select(select_args);
    }
    if (*simulate) return cmd_simulate(sim_config, sim_out, sim_format);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "fpcsa: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "fpcsa: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fpcsa: %s\n", e.what());
    return 1;
  }
}
