// qtradeoff command-line front end.
//
//   qtradeoff --command sweep --p-step 0.05 --q-step 0.05 --out sweep.csv
//   qtradeoff --command bound --resolution 401 --oracle
//   qtradeoff --command experiment --theta 9/32 --theta 1/4 --visibility 50:1
//   qtradeoff --command verify
//
// Exit status: 0 success, 1 invariant failure or runtime error, 2 usage error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qtradeoff/commands.hpp"

namespace {

constexpr int kExitInvariantFailure = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string command;
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<std::string> theta;
  bool exact = false;
  bool oracle = false;
};

/// Copies an option into the parameter map only when the user gave it, so
/// resolve() can reject flags that the chosen command does not take.
void forward(const CLI::App& app, const char* flag, const std::string& value, const char* key,
             std::map<std::string, std::string>& params) {
  if (app.count(flag) > 0) params[key] = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrence versus mutual information: bounds, state families and simulated tomography"};
  app.set_version_flag("--version", std::string(qtradeoff::kVersion));

  Flags f;
  std::string shots, p_step, q_step, step, p_min, p_max, q_min, q_max, resolution, oracle_resolution, band, tolerance,
      points, visibility, depolarizing, bootstrap, method, count_model;

  app.add_option("--command", f.command, "sweep | bound | oracle | experiment | verify")->required();
  app.add_option("--out", f.out, "output CSV path (default: stdout)");
  app.add_option("--seed", f.seed, "base RNG seed")->capture_default_str();
  app.add_option("--threads", f.threads, "worker threads, 0 = all cores (output does not depend on it)")
      ->capture_default_str();

  app.add_option("--p-min", p_min, "sweep: lower end of p");
  app.add_option("--p-max", p_max, "sweep: upper end of p");
  app.add_option("--q-min", q_min, "sweep: lower end of q");
  app.add_option("--q-max", q_max, "sweep: upper end of q");
  app.add_option("--p-step", p_step, "sweep: p spacing");
  app.add_option("--q-step", q_step, "sweep: q spacing");
  app.add_option("--step", step, "sweep: spacing for both p and q");

  app.add_option("--resolution", resolution,
                 "bound/verify: number of c samples; oracle: simplex grid resolution");
  app.add_option("--oracle-resolution", oracle_resolution, "bound/verify: simplex grid resolution");
  app.add_option("--band", band, "oracle: entropy acceptance half-width");
  app.add_option("--tolerance", tolerance, "bound/oracle: allowed |oracle - closed form|");
  app.add_option("--points", points, "oracle: number of c samples");
  app.add_flag("--oracle", f.oracle, "bound: add the grid-oracle column");

  app.add_option("--theta", f.theta, "experiment: source angle as a multiple of pi, e.g. 9/32 (repeatable)");
  app.add_option("--shots", shots, "experiment: shots per measurement setting");
  app.add_flag("--exact", f.exact, "experiment: infinite-shot mode");
  app.add_option("--visibility", visibility, "experiment: path coherence scale v, or contrast like 50:1");
  app.add_option("--depolarizing", depolarizing, "experiment: per-qubit depolarizing probability");
  app.add_option("--bootstrap", bootstrap, "experiment: bootstrap resamples (0 disables)");
  app.add_option("--method", method, "experiment: mle | linear");
  app.add_option("--count-model", count_model, "experiment: multinomial | poisson");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  qtradeoff::RunConfig cfg;
  try {
    cfg.command = qtradeoff::parse_command(f.command);
    cfg.output_path = f.out;
    cfg.seed = f.seed;
    cfg.threads = f.threads;
    auto& params = cfg.parameters;
    forward(app, "--step", step, "p_step", params);
    forward(app, "--step", step, "q_step", params);
    forward(app, "--p-min", p_min, "p_min", params);
    forward(app, "--p-max", p_max, "p_max", params);
    forward(app, "--q-min", q_min, "q_min", params);
    forward(app, "--q-max", q_max, "q_max", params);
    forward(app, "--p-step", p_step, "p_step", params);
    forward(app, "--q-step", q_step, "q_step", params);
    forward(app, "--resolution", resolution, "resolution", params);
    forward(app, "--oracle-resolution", oracle_resolution, "oracle_resolution", params);
    forward(app, "--band", band, "band", params);
    forward(app, "--tolerance", tolerance, "tolerance", params);
    forward(app, "--points", points, "points", params);
    forward(app, "--shots", shots, "shots", params);
    forward(app, "--visibility", visibility, "visibility", params);
    forward(app, "--depolarizing", depolarizing, "depolarizing", params);
    forward(app, "--bootstrap", bootstrap, "bootstrap", params);
    forward(app, "--method", method, "method", params);
    forward(app, "--count-model", count_model, "count_model", params);
    if (f.oracle) params["oracle"] = "true";
    if (f.exact) params["exact"] = "true";
    if (!f.theta.empty()) {
      std::string joined;
      for (const auto& t : f.theta) joined += (joined.empty() ? "" : ",") + t;
      params["theta"] = joined;
    }
    cfg = qtradeoff::resolve(std::move(cfg));
  } catch (const std::invalid_argument& e) {
    std::cerr << "qtradeoff: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto out = qtradeoff::run_command(cfg);
    qtradeoff::write_output(cfg, out);
    std::cerr << out.summary;
    if (!out.ok()) {
      for (const auto& name : out.failures) std::cerr << "FAILED " << name << '\n';
      return kExitInvariantFailure;
    }
  } catch (const qtradeoff::UsageError& e) {
    std::cerr << "qtradeoff: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "qtradeoff: " << e.what() << '\n';
    return kExitInvariantFailure;
  }
  return 0;
}
