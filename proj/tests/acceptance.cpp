// Acceptance runner: ten end-to-end checks at their stated tolerances and
// time budgets. Prints one PASS/FAIL line per check and exits nonzero if any
// check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtradeoff/qtradeoff.hpp"

using namespace qtradeoff;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Check {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome bound_endpoints() {
  const double at_zero = zeta(0.0);
  double worst_tail = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double c = kZeroConcurrenceThreshold + (kMaxMutualInformation - kZeroConcurrenceThreshold) * i / 99.0;
    worst_tail = std::max(worst_tail, std::abs(zeta(c)));
  }
  const bool ok = std::abs(at_zero - 1.0) <= 1e-9 && worst_tail <= 1e-9;
  return {ok, "zeta(0)=" + num(at_zero) + " max|zeta| on tail=" + num(worst_tail)};
}

Outcome timebin_containment() {
  double worst_closed = 0.0;
  double worst_margin = INFINITY;
  for (int i = 0; i <= 100; ++i) {
    const double p = 0.005 * i;
    const double theta = std::acos(std::sqrt(p));
    const auto rho = timebin_mix(dephase(spdc_state(theta)), p);
    const auto m = measure_report(rho);
    worst_closed = std::max({worst_closed, std::abs(m.mutual_information - timebin_mutual_information(p)),
                             std::abs(m.concurrence - timebin_concurrence(p))});
    worst_margin = std::min(worst_margin, region_check({m.mutual_information, m.concurrence}).margin);
  }
  const bool ok = worst_closed <= 1e-9 && worst_margin >= -1e-9;
  return {ok, "max closed-form deviation=" + num(worst_closed) + " min margin=" + num(worst_margin)};
}

Outcome concurrence_root() {
  const double root = timebin_concurrence_root();
  // Cross-check against the state itself: entangled just below, separable just above.
  auto numeric = [](double p) { return concurrence(partial_trace(cc_family(p, 1 - p), {0, 1})); };
  const bool bracket = numeric(0.3015) > 1e-6 && numeric(0.3020) < 1e-9;
  const bool ok = root > 0.3015 && root < 0.3020 && bracket;
  return {ok, "root p=" + std::to_string(root) + (bracket ? "" : " (numeric bracket failed)")};
}

Outcome oracle_agreement() {
  const SimplexGrid grid(200);
  double worst = 0.0;
  for (double c : mutual_information_grid(50)) worst = std::max(worst, std::abs(grid.oracle_zeta(c, 0.01) - zeta(c)));
  const auto sound = oracle_soundness(grid, kAnalyticRegionTolerance);
  const bool ok = worst <= 0.02 && sound.violations == 0;
  return {ok, "max |oracle-zeta|=" + num(worst) + " tuples=" + std::to_string(sound.tuples) +
                  " violations=" + std::to_string(sound.violations)};
}

Outcome two_parameter_sweep() {
  double worst_closed = 0.0;
  std::size_t outside = 0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const double p = i / 49.0, q = j / 49.0;
      const auto rho = cc_family(p, q);
      const double mi = mutual_information(rho, {{0, 1}});
      const double e = concurrence(partial_trace(rho, {0, 1}));
      worst_closed = std::max({worst_closed, std::abs(mi - closed_form_I(p, q)), std::abs(e - closed_form_E(p, q))});
      if (!region_check({mi, e}).inside_separable_region) ++outside;
    }
  const bool ok = worst_closed <= 1e-9 && outside == 0;
  return {ok, "max closed-form deviation=" + num(worst_closed) + " outside=" + std::to_string(outside)};
}

Outcome spin_flip_fixture() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const double p = u(rng), q = u(rng);
    const double qt = std::min(q, 1 - q);
    std::vector<double> expected{qt * qt * (1 - p) * (1 - p), (1 - qt) * (1 - qt) * (1 - p) * (1 - p),
                                 p * p * qt * (1 - qt), p * p * qt * (1 - qt)};
    std::sort(expected.begin(), expected.end(), std::greater<>{});
    const auto numeric = spin_flip_eigenvalues(partial_trace(cc_family(p, q), {0, 1}));
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(numeric[k] - expected[k]));
  }
  return {worst <= 1e-10, "max multiset deviation=" + num(worst)};
}

Outcome tomography_exact() {
  double worst = 1.0;
  ExperimentOptions opt;
  opt.exact = true;
  for (const auto& a : reference_angles()) worst = std::min(worst, run_experiment(a.radians(), opt).result.fidelity_to_target);
  return {worst >= 1 - 1e-9, "min fidelity=1-" + num(1 - worst)};
}

Outcome tomography_desk_scale() {
  const auto angles = reference_angles();
  double worst_median = 1.0;
  double noisy_lo = 1.0, noisy_hi = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    std::vector<double> clean;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      ExperimentOptions opt;
      opt.shots = 10000;
      opt.seed = derive_stream_seed(s, 1000 + k);
      clean.push_back(run_experiment(angles[k].radians(), opt).result.fidelity_to_target);
      opt.noise.visibility = visibility_from_contrast(50.0);
      const double f = run_experiment(angles[k].radians(), opt).result.fidelity_to_target;
      noisy_lo = std::min(noisy_lo, f);
      noisy_hi = std::max(noisy_hi, f);
    }
    worst_median = std::min(worst_median, median(clean));
  }
  const bool ok = worst_median >= 0.99 && noisy_lo >= 0.93 && noisy_hi <= 1.0;
  return {ok, "worst median (noiseless)=" + num(worst_median) + " noisy range=[" + num(noisy_lo) + ", " +
                  num(noisy_hi) + "]"};
}

Outcome experimental_dots() {
  RunConfig cfg;
  cfg.command = Command::experiment;
  cfg.seed = 1;
  const auto out = run_command(resolve(cfg));
  std::size_t rows = 0, inside = 0;
  double worst_margin = INFINITY;
  std::istringstream is(out.csv());
  bool header = false;
  for (std::string line; std::getline(is, line);) {
    if (line.rfind("# ", 0) == 0) continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    worst_margin = std::min(worst_margin, std::stod(cells[10]));
    if (cells[11] == "1") ++inside;
  }
  const bool ok = out.ok() && rows == 12 && inside == 12;
  return {ok, std::to_string(inside) + "/" + std::to_string(rows) + " inside at 3 sigma, min margin=" +
                  num(worst_margin)};
}

std::string run_to_file(const RunConfig& cfg, const std::filesystem::path& path) {
  RunConfig c = cfg;
  c.output_path = path.string();
  write_output(c, run_command(c));
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::filesystem::remove(path);
  return ss.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<RunConfig> configs;
  auto add = [&](Command c, std::map<std::string, std::string> params) {
    RunConfig cfg;
    cfg.command = c;
    cfg.seed = 99;
    cfg.parameters = std::move(params);
    configs.push_back(resolve(cfg));
  };
  add(Command::sweep, {{"p_step", "0.05"}, {"q_step", "0.05"}});
  add(Command::bound, {{"oracle", "true"}});
  add(Command::oracle, {{"points", "20"}});
  add(Command::experiment, {{"theta", "1/8,9/32,7/16"}, {"shots", "2000"}, {"bootstrap", "10"}});
  std::size_t identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig serial = configs[i], parallel = configs[i];
    serial.threads = 1;
    parallel.threads = 4;
    const auto stem = "qtradeoff_acceptance_" + std::to_string(i);
    const auto a = run_to_file(serial, dir / (stem + "_a.csv"));
    const auto b = run_to_file(serial, dir / (stem + "_b.csv"));
    const auto c = run_to_file(parallel, dir / (stem + "_c.csv"));
    if (!a.empty() && a == b && a == c) ++identical;
  }
  return {identical == configs.size(),
          std::to_string(identical) + "/" + std::to_string(configs.size()) + " commands byte-identical"};
}

}  // namespace

int main() {
  const std::vector<Check> checks{
      {"bound_endpoints", 1.0, bound_endpoints},
      {"timebin_curve_containment", 10.0, timebin_containment},
      {"concurrence_root", 1.0, concurrence_root},
      {"oracle_agreement_and_soundness", 300.0, oracle_agreement},
      {"two_parameter_sweep", 120.0, two_parameter_sweep},
      {"spin_flip_eigenvalues", 5.0, spin_flip_fixture},
      {"tomography_exact", 30.0, tomography_exact},
      {"tomography_desk_scale", 600.0, tomography_desk_scale},
      {"experimental_dots_in_region", 600.0, experimental_dots},
      {"determinism", 60.0, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& check = checks[i];
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = check.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= check.budget_seconds;
    const bool passed = o.passed && in_time;
    if (!passed) ++failures;
    std::printf("%s [%zu/10] %s  %.2fs (budget %.0fs)%s  %s\n", passed ? "PASS" : "FAIL", i + 1, check.name, seconds,
                check.budget_seconds, in_time ? "" : " OVER BUDGET", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu checks failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
