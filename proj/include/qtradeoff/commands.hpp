// commands.hpp
// Command layer behind the CLI: run configuration, CSV emission and the five
// commands (sweep, bound, oracle, experiment, verify).

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtradeoff/bound.hpp"
#include "qtradeoff/measures.hpp"
#include "qtradeoff/states.hpp"
#include "qtradeoff/tomo.hpp"
#include "qtradeoff/verify.hpp"

#ifndef QTRADEOFF_VERSION
#define QTRADEOFF_VERSION "0.0.0"
#endif

namespace qtradeoff {

inline constexpr std::string_view kVersion = QTRADEOFF_VERSION;

/// Bad user input: unknown keys, malformed values, out-of-range parameters.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { sweep, bound, oracle, experiment, verify };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::sweep: return "sweep";
    case Command::bound: return "bound";
    case Command::oracle: return "oracle";
    case Command::experiment: return "experiment";
    case Command::verify: return "verify";
  }
  return "?";
}

inline Command parse_command(std::string_view name) {
  for (Command c : {Command::sweep, Command::bound, Command::oracle, Command::experiment, Command::verify})
    if (to_string(c) == name) return c;
  throw UsageError("unknown command '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Value parsing.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double x = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc{} || end != t.data() + t.size() || !std::isfinite(x)) {
    throw UsageError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
  return x;
}

inline long long parse_integer(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  long long x = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc{} || end != t.data() + t.size()) {
    throw UsageError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
  }
  return x;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw UsageError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses an angle given as a multiple of pi: "9/32", "1/2", "0", "0.25".
inline double parse_pi_multiple(std::string_view text) {
  const std::string t = detail::trim(text);
  const auto slash = t.find('/');
  double value = 0.0;
  if (slash == std::string::npos) {
    value = detail::parse_real("theta", t);
  } else {
    const auto num = detail::parse_integer("theta", std::string_view(t).substr(0, slash));
    const auto den = detail::parse_integer("theta", std::string_view(t).substr(slash + 1));
    if (den <= 0) throw UsageError("theta: denominator must be positive in '" + t + "'");
    value = static_cast<double>(num) / static_cast<double>(den);
  }
  const double theta = value * std::numbers::pi;
  if (!(theta >= -kAngleTolerance && theta <= std::numbers::pi / 2 + kAngleTolerance)) {
    throw UsageError("theta: '" + t + "' is outside [0, 1/2] (in units of pi)");
  }
  return std::clamp(theta, 0.0, std::numbers::pi / 2);
}

/// Visibility as a coherence scale v in [0, 1] or as a contrast "r:1".
inline double parse_visibility(std::string_view text) {
  const std::string t = detail::trim(text);
  const auto colon = t.find(':');
  if (colon != std::string::npos) {
    const double r = detail::parse_real("visibility", std::string_view(t).substr(0, colon));
    const double s = detail::parse_real("visibility", std::string_view(t).substr(colon + 1));
    if (!(s > 0.0) || !(r >= s)) throw UsageError("visibility: contrast must be r:s with r >= s > 0");
    return visibility_from_contrast(r / s);
  }
  const double v = detail::parse_real("visibility", t);
  if (!(v >= 0.0 && v <= 1.0)) throw UsageError("visibility: must lie in [0, 1]");
  return v;
}

/// Shortest text for a double that reads back to the same value.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Run configuration.

struct ParamSpec {
  std::string_view key;
  std::string_view default_value;
  std::string_view help;
};

inline constexpr std::string_view kReferenceAngleList = "0,1/16,1/8,3/16,1/4,9/32,11/32,3/8,13/32,7/16,15/32,1/2";

inline const std::vector<ParamSpec>& parameter_schema(Command c) {
  static const std::vector<ParamSpec> sweep{
      {"p_min", "0", "lower end of the p range"},   {"p_max", "1", "upper end of the p range"},
      {"q_min", "0", "lower end of the q range"},   {"q_max", "1", "upper end of the q range"},
      {"p_step", "0.02", "p grid spacing"},          {"q_step", "0.02", "q grid spacing"},
  };
  static const std::vector<ParamSpec> bound{
      {"resolution", "201", "number of c samples on [0, 2 ln 2]"},
      {"oracle", "false", "add the grid-oracle column"},
      {"oracle_resolution", "200", "simplex grid resolution N"},
      {"band", "0.01", "entropy acceptance half-width"},
      {"tolerance", "0.02", "allowed |oracle - closed form|"},
  };
  static const std::vector<ParamSpec> oracle{
      {"resolution", "200", "simplex grid resolution N"},
      {"band", "0.01", "entropy acceptance half-width"},
      {"points", "50", "number of c samples on [0, 2 ln 2]"},
      {"tolerance", "0.02", "allowed |oracle - closed form|"},
  };
  static const std::vector<ParamSpec> experiment{
      {"theta", kReferenceAngleList, "source angles as multiples of pi"},
      {"shots", "10000", "shots per measurement setting"},
      {"exact", "false", "infinite-shot mode"},
      {"visibility", "1", "path-qubit coherence scale v, or contrast r:1"},
      {"depolarizing", "0", "per-qubit depolarizing probability"},
      {"bootstrap", "200", "bootstrap resamples for the error bars (0 disables)"},
      {"method", "mle", "reconstruction for sampled data: mle or linear"},
      {"count_model", "multinomial", "multinomial or poisson"},
  };
  static const std::vector<ParamSpec> verify{
      {"resolution", "201", "closed-form curve samples"},
      {"oracle_resolution", "200", "simplex grid resolution N"},
      {"band", "0.01", "entropy acceptance half-width"},
  };
  switch (c) {
    case Command::sweep: return sweep;
    case Command::bound: return bound;
    case Command::oracle: return oracle;
    case Command::experiment: return experiment;
    case Command::verify: return verify;
  }
  throw std::logic_error("parameter_schema: unhandled command");
}

struct RunConfig {
  Command command = Command::verify;
  std::map<std::string, std::string> parameters;
  std::string output_path;  // empty or "-" writes to stdout
  std::uint64_t seed = 1;
  // Execution detail, not part of the echoed configuration: the output is
  // the same for every thread count.
  unsigned threads = 1;

  bool has(const std::string& key) const { return parameters.count(key) != 0; }
  const std::string& raw(const std::string& key) const {
    const auto it = parameters.find(key);
    if (it == parameters.end()) throw std::logic_error("RunConfig: missing parameter '" + key + "'");
    return it->second;
  }
  double real(const std::string& key) const { return detail::parse_real(key, raw(key)); }
  long long integer(const std::string& key) const { return detail::parse_integer(key, raw(key)); }
  bool flag(const std::string& key) const { return detail::parse_bool(key, raw(key)); }
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

/// Rewrites every value into canonical form and checks its range.
inline void canonicalize(RunConfig& cfg) {
  auto& p = cfg.parameters;
  auto set_real = [&](const char* key) { p[key] = format_real(cfg.real(key)); };
  auto set_int = [&](const char* key, long long lo) {
    const auto v = cfg.integer(key);
    require(v >= lo, std::string(key) + " must be at least " + std::to_string(lo));
    p[key] = std::to_string(v);
  };
  auto set_bool = [&](const char* key) { p[key] = cfg.flag(key) ? "true" : "false"; };
  auto positive = [&](const char* key) { require(cfg.real(key) > 0.0, std::string(key) + " must be positive"); };
  auto probability = [&](const char* key) {
    const double x = cfg.real(key);
    require(x >= 0.0 && x <= 1.0, std::string(key) + " must lie in [0, 1]");
  };

  switch (cfg.command) {
    case Command::sweep:
      for (const char* k : {"p_min", "p_max", "q_min", "q_max", "p_step", "q_step"}) set_real(k);
      for (const char* k : {"p_min", "p_max", "q_min", "q_max"}) probability(k);
      positive("p_step");
      positive("q_step");
      require(cfg.real("p_max") >= cfg.real("p_min"), "p_max must not be below p_min");
      require(cfg.real("q_max") >= cfg.real("q_min"), "q_max must not be below q_min");
      break;
    case Command::bound:
      set_int("resolution", 2);
      set_bool("oracle");
      set_int("oracle_resolution", 4);
      set_real("band");
      set_real("tolerance");
      positive("band");
      positive("tolerance");
      break;
    case Command::oracle:
      set_int("resolution", 100);
      set_real("band");
      set_int("points", 2);
      set_real("tolerance");
      positive("band");
      positive("tolerance");
      break;
    case Command::experiment: {
      std::vector<std::string> angles = split_list(cfg.raw("theta"));
      require(!angles.empty(), "theta: at least one angle is required");
      std::string joined;
      for (const auto& a : angles) {
        parse_pi_multiple(a);
        joined += (joined.empty() ? "" : ",") + a;
      }
      p["theta"] = joined;
      set_int("shots", 1);
      set_bool("exact");
      p["visibility"] = format_real(parse_visibility(cfg.raw("visibility")));
      set_real("depolarizing");
      probability("depolarizing");
      const auto b = cfg.integer("bootstrap");
      require(b == 0 || b >= 2, "bootstrap must be 0 or at least 2");
      p["bootstrap"] = std::to_string(b);
      require(cfg.raw("method") == "mle" || cfg.raw("method") == "linear", "method must be mle or linear");
      require(cfg.raw("count_model") == "multinomial" || cfg.raw("count_model") == "poisson",
              "count_model must be multinomial or poisson");
      break;
    }
    case Command::verify:
      set_int("resolution", 2);
      set_int("oracle_resolution", 4);
      set_real("band");
      positive("band");
      break;
  }
}

}  // namespace detail

/// Rejects unknown keys, fills defaults and canonicalizes every value, so
/// two configurations that mean the same thing print the same header.
inline RunConfig resolve(RunConfig cfg) {
  const auto& schema = parameter_schema(cfg.command);
  for (const auto& [key, value] : cfg.parameters) {
    const bool known = std::any_of(schema.begin(), schema.end(), [&](const ParamSpec& s) { return s.key == key; });
    if (!known) {
      throw UsageError("parameter '" + key + "' is not accepted by the " + std::string(to_string(cfg.command)) +
                       " command");
    }
  }
  for (const auto& s : schema) cfg.parameters.try_emplace(std::string(s.key), std::string(s.default_value));
  detail::canonicalize(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// CSV output.

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& key, const std::string& value) { comments_.push_back(key + "=" + value); }

  /// Cells are pre-formatted strings; use format_real for numbers.
  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("CsvTable: row has the wrong number of cells");
    rows_.push_back(std::move(cells));
  }

  std::size_t rows() const noexcept { return rows_.size(); }

  void write(std::ostream& os) const {
    for (const auto& c : comments_) os << "# " << c << '\n';
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

struct CommandOutput {
  CsvTable table;
  std::vector<std::string> failures;  // names of violated invariants
  std::string summary;                // human-readable report, may be empty

  bool ok() const noexcept { return failures.empty(); }
  std::string csv() const { return table.str(); }
};

namespace detail {

inline void echo_config(CsvTable& t, const RunConfig& cfg) {
  t.comment("qtradeoff", std::string(kVersion));
  t.comment("command", std::string(to_string(cfg.command)));
  t.comment("seed", std::to_string(cfg.seed));
  for (const auto& [k, v] : cfg.parameters) t.comment(k, v);
}

inline void add_failure(std::vector<std::string>& failures, const std::string& name) {
  if (std::find(failures.begin(), failures.end(), name) == failures.end()) failures.push_back(name);
}

inline const char* yes_no(bool b) { return b ? "1" : "0"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each takes a resolved configuration.

/// Two-parameter family over a (p, q) grid, followed by the q = 1 - p
/// diagonal (the time-bin family) over the same p values.
inline CommandOutput cmd_sweep(const RunConfig& cfg) {
  const auto ps = detail::inclusive_range(cfg.real("p_min"), cfg.real("p_max"), cfg.real("p_step"));
  const auto qs = detail::inclusive_range(cfg.real("q_min"), cfg.real("q_max"), cfg.real("q_step"));

  struct Point {
    bool diagonal;
    double p, q;
  };
  std::vector<Point> points;
  points.reserve(ps.size() * qs.size() + ps.size());
  for (double p : ps)
    for (double q : qs) points.push_back({false, p, q});
  for (double p : ps) points.push_back({true, p, 1.0 - p});

  struct Row {
    double i, e, i_closed, e_closed, z, margin;
  };
  std::vector<Row> rows(points.size());
  detail::parallel_for(points.size(), cfg.threads, [&](std::size_t k) {
    const auto [diag, p, q] = points[k];
    const auto m = measure_report(cc_family(p, q));
    const auto v = region_check({m.mutual_information, m.concurrence});
    rows[k] = {m.mutual_information, m.concurrence, closed_form_I(p, q), closed_form_E(p, q),
               zeta_extended(m.mutual_information), v.margin};
  });

  CommandOutput out{CsvTable({"family", "p", "q", "I", "E", "I_closed", "E_closed", "zeta_I", "margin"}), {}, {}};
  detail::echo_config(out.table, cfg);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& r = rows[k];
    if (std::abs(r.i - r.i_closed) > kAnalyticRegionTolerance || std::abs(r.e - r.e_closed) > kAnalyticRegionTolerance) {
      detail::add_failure(out.failures, "sweep.closed_form_agreement");
    }
    if (r.margin < -kAnalyticRegionTolerance) detail::add_failure(out.failures, "sweep.region_check");
    out.table.add_row({points[k].diagonal ? "diagonal" : "grid", format_real(points[k].p), format_real(points[k].q),
                       format_real(r.i), format_real(r.e), format_real(r.i_closed), format_real(r.e_closed),
                       format_real(r.z), format_real(r.margin)});
  }
  return out;
}

/// zeta sampled on [0, 2 ln 2], optionally next to the grid oracle.
inline CommandOutput cmd_bound(const RunConfig& cfg) {
  const bool with_oracle = cfg.flag("oracle");
  const BoundCurve curve = closed_form_curve(static_cast<int>(cfg.integer("resolution")));
  std::vector<std::string> columns{"c", "zeta"};
  if (with_oracle) columns.insert(columns.end(), {"zeta_oracle", "abs_diff"});
  CommandOutput out{CsvTable(std::move(columns)), validate_curve(curve, kAnalyticRegionTolerance), {}};
  detail::echo_config(out.table, cfg);

  std::vector<double> oracle_values;
  if (with_oracle) {
    const SimplexGrid grid(static_cast<int>(cfg.integer("oracle_resolution")));
    oracle_values.resize(curve.samples.size());
    const double band = cfg.real("band");
    detail::parallel_for(curve.samples.size(), cfg.threads, [&](std::size_t k) {
      try {
        oracle_values[k] = grid.oracle_zeta(curve.samples[k].c, band);
      } catch (const std::domain_error&) {
        oracle_values[k] = std::nan("");  // no grid entropy within the band
      }
    });
    const auto empty = std::count_if(oracle_values.begin(), oracle_values.end(), [](double v) { return std::isnan(v); });
    out.table.comment("oracle_empty_bands", std::to_string(empty));
  }
  for (std::size_t k = 0; k < curve.samples.size(); ++k) {
    const auto [c, e] = curve.samples[k];
    std::vector<std::string> row{format_real(c), format_real(e)};
    if (with_oracle) {
      const double diff = std::abs(oracle_values[k] - e);
      if (!std::isnan(diff) && diff > cfg.real("tolerance")) detail::add_failure(out.failures, "bound.oracle_agreement");
      row.insert(row.end(), {format_real(oracle_values[k]), format_real(diff)});
    }
    out.table.add_row(std::move(row));
  }
  return out;
}

/// Grid oracle against the closed form, with the maximizing tuple per c and
/// a soundness pass over the whole grid.
inline CommandOutput cmd_oracle(const RunConfig& cfg) {
  const int resolution = static_cast<int>(cfg.integer("resolution"));
  const double band = cfg.real("band");
  const double tolerance = cfg.real("tolerance");
  const SimplexGrid grid(resolution);
  const auto cs = mutual_information_grid(static_cast<int>(cfg.integer("points")));

  std::vector<OracleResult> scans(cs.size());
  detail::parallel_for(cs.size(), cfg.threads, [&](std::size_t k) {
    try {
      scans[k] = grid.zeta_scan(cs[k], band);
    } catch (const std::domain_error&) {
      scans[k].value = std::nan("");  // accepted stays 0
    }
  });
  const SoundnessReport sound = oracle_soundness(grid, kAnalyticRegionTolerance);

  CommandOutput out{CsvTable({"c", "zeta", "zeta_oracle", "abs_diff", "n1", "n2", "n3", "n4", "accepted"}), {}, {}};
  detail::echo_config(out.table, cfg);
  out.table.comment("soundness_tuples", std::to_string(sound.tuples));
  out.table.comment("soundness_violations", std::to_string(sound.violations));
  out.table.comment("soundness_worst_margin", format_real(sound.worst_margin));
  if (sound.violations != 0) out.failures.push_back("oracle.soundness");
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const double z = zeta(cs[k]);
    const double diff = std::abs(scans[k].value - z);
    if (scans[k].accepted == 0) {
      detail::add_failure(out.failures, "oracle.empty_band");
    } else if (diff > tolerance) {
      detail::add_failure(out.failures, "oracle.agreement");
    }
    const auto& n = scans[k].argmax.counts;
    out.table.add_row({format_real(cs[k]), format_real(z), format_real(scans[k].value), format_real(diff),
                       std::to_string(n[0]), std::to_string(n[1]), std::to_string(n[2]), std::to_string(n[3]),
                       std::to_string(scans[k].accepted)});
  }
  return out;
}

/// Seed of the sampling run for the k-th angle of an experiment.
inline std::uint64_t experiment_angle_seed(std::uint64_t seed, std::size_t k) {
  return derive_stream_seed(seed, 1000 + k, 0);
}

/// Seed of the bootstrap for the k-th angle of an experiment.
inline std::uint64_t experiment_bootstrap_seed(std::uint64_t seed, std::size_t k) {
  return derive_stream_seed(seed, 1000 + k, 1);
}

/// Simulated tomography of the time-bin state at each angle.
inline CommandOutput cmd_experiment(const RunConfig& cfg) {
  ExperimentOptions base;
  base.shots = static_cast<std::uint64_t>(cfg.integer("shots"));
  base.exact = cfg.flag("exact");
  base.noise.visibility = cfg.real("visibility");
  base.noise.depolarizing = cfg.real("depolarizing");
  base.method = cfg.raw("method") == "linear" ? ReconstructionMethod::linear : ReconstructionMethod::maximum_likelihood;
  base.count_model = cfg.raw("count_model") == "poisson" ? CountModel::poisson : CountModel::multinomial;
  base.threads = cfg.threads;
  const auto resamples = static_cast<std::size_t>(cfg.integer("bootstrap"));
  const bool noiseless = base.noise == NoiseParams{};

  CommandOutput out{CsvTable({"theta_over_pi", "theta", "p", "I_hat", "E_hat", "I_err", "E_err", "fidelity",
                              "I_closed", "E_closed", "margin", "inside"}),
                    {},
                    {}};
  detail::echo_config(out.table, cfg);
  if (!noiseless) {
    out.table.comment("note", "visibility and depolarizing noise is a stand-in model; fidelity is against the "
                              "noiseless target");
  }

  const auto angles = detail::split_list(cfg.raw("theta"));
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double theta = parse_pi_multiple(angles[k]);
    ExperimentOptions opt = base;
    opt.seed = experiment_angle_seed(cfg.seed, k);
    const ExperimentRun run = run_experiment(theta, opt);
    const auto& m = run.result.measures;
    const double i_closed = timebin_mutual_information(run.params.p);
    const double e_closed = timebin_concurrence(run.params.p);

    BootstrapErrors errs;
    if (!base.exact && resamples >= 2) {
      errs = bootstrap_errors(run.dataset.records, resamples, experiment_bootstrap_seed(cfg.seed, k), base.method,
                              cfg.threads);
    }
    const RegionVerdict v = base.exact ? region_check({m.mutual_information, m.concurrence})
                                       : region_check_with_errors({m.mutual_information, m.concurrence},
                                                                  errs.sigma_I, errs.sigma_E);
    if (!v.inside_separable_region) detail::add_failure(out.failures, "experiment.region_check");
    if (base.exact && noiseless &&
        (std::abs(m.mutual_information - i_closed) > kAnalyticRegionTolerance ||
         std::abs(m.concurrence - e_closed) > kAnalyticRegionTolerance)) {
      detail::add_failure(out.failures, "experiment.closed_form_agreement");
    }
    out.table.add_row({angles[k], format_real(theta), format_real(run.params.p), format_real(m.mutual_information),
                       format_real(m.concurrence), format_real(errs.sigma_I), format_real(errs.sigma_E),
                       format_real(run.result.fidelity_to_target), format_real(i_closed), format_real(e_closed),
                       format_real(v.margin), detail::yes_no(v.inside_separable_region)});
  }
  return out;
}

/// The invariant suite as a table of named pass/fail rows.
inline CommandOutput cmd_verify(const RunConfig& cfg, std::optional<BoundCurve> injected_curve = std::nullopt) {
  VerifyOptions opt;
  opt.curve_points = static_cast<int>(cfg.integer("resolution"));
  opt.oracle_resolution = static_cast<int>(cfg.integer("oracle_resolution"));
  opt.oracle_band = cfg.real("band");
  opt.seed = cfg.seed;
  opt.bound_curve = std::move(injected_curve);
  const auto results = run_invariant_suite(opt);

  CommandOutput out{CsvTable({"invariant", "passed", "detail"}), {}, {}};
  detail::echo_config(out.table, cfg);
  for (const auto& r : results) {
    if (!r.passed) out.failures.push_back(r.name);
    out.summary += std::string(r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + "\n";
    std::string detail_text = r.detail;
    std::replace(detail_text.begin(), detail_text.end(), ',', ';');
    out.table.add_row({r.name, detail::yes_no(r.passed), detail_text});
  }
  return out;
}

inline CommandOutput run_command(const RunConfig& resolved) {
  switch (resolved.command) {
    case Command::sweep: return cmd_sweep(resolved);
    case Command::bound: return cmd_bound(resolved);
    case Command::oracle: return cmd_oracle(resolved);
    case Command::experiment: return cmd_experiment(resolved);
    case Command::verify: return cmd_verify(resolved);
  }
  throw std::logic_error("run_command: unhandled command");
}

/// Writes the CSV to cfg.output_path, or to `fallback` when the path is
/// empty or "-". Throws std::runtime_error when the file cannot be written.
inline void write_output(const RunConfig& cfg, const CommandOutput& out, std::ostream& fallback = std::cout) {
  if (cfg.output_path.empty() || cfg.output_path == "-") {
    out.table.write(fallback);
    return;
  }
  std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + cfg.output_path + "' for writing");
  out.table.write(file);
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + cfg.output_path + "'");
}

}  // namespace qtradeoff
