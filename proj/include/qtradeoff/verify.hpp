// verify.hpp
// Named invariant suite shared by the `verify` command and the tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtradeoff/bound.hpp"
#include "qtradeoff/measures.hpp"
#include "qtradeoff/qmat.hpp"
#include "qtradeoff/states.hpp"
#include "qtradeoff/tomo.hpp"

namespace qtradeoff {

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  int curve_points = 201;
  int oracle_resolution = 200;
  double oracle_band = 0.01;
  double oracle_tolerance = 0.02;
  int oracle_points = 50;
  std::uint64_t seed = 1;
  // Replaces the closed-form table checked by the bound.* curve invariants.
  std::optional<BoundCurve> bound_curve;
};

namespace detail {

inline std::string fmt_g(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

/// Evaluates check() and turns exceptions into a failed invariant.
template <class Check>
InvariantResult run_invariant(std::string name, Check check) {
  InvariantResult r{std::move(name), false, {}};
  try {
    r.detail = check(r.passed);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

/// p-values p_min, p_min + step, ..., never exceeding p_max by more than
/// rounding, with p_max itself included.
inline std::vector<double> inclusive_range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("range: step must be positive");
  if (!(hi >= lo)) throw std::invalid_argument("range: upper end below lower end");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  if (hi - out.back() > 1e-12) out.push_back(hi);
  return out;
}

struct FamilyCheck {
  double worst_closed_form = 0.0;  // max |numerical - closed form| over I and E
  double worst_margin = INFINITY;
};

inline FamilyCheck check_family_point(double p, double q, FamilyCheck acc) {
  const auto m = measure_report(cc_family(p, q));
  acc.worst_closed_form = std::max({acc.worst_closed_form, std::abs(m.mutual_information - closed_form_I(p, q)),
                                    std::abs(m.concurrence - closed_form_E(p, q))});
  acc.worst_margin = std::min(acc.worst_margin, region_check({m.mutual_information, m.concurrence}).margin);
  return acc;
}

}  // namespace detail

/// Root of the time-bin concurrence in p, by bisection on [1/4, 1/2].
inline double timebin_concurrence_root() {
  // The closed form is clamped at zero, so bisect on the unclamped expression.
  auto f = [](double p) { return (1.0 - 2.0 * p) * (1.0 - p) - 2.0 * std::sqrt(p * p * p * (1.0 - p)); };
  double lo = 0.25, hi = 0.5;
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<InvariantResult> run_invariant_suite(const VerifyOptions& opt = {}) {
  std::vector<InvariantResult> out;

  out.push_back(detail::run_invariant("bound.zeta_endpoints", [](bool& ok) {
    double worst_tail = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double c = kZeroConcurrenceThreshold + (kMaxMutualInformation - kZeroConcurrenceThreshold) * i / 99.0;
      worst_tail = std::max(worst_tail, std::abs(zeta(c)));
    }
    const double head = std::abs(zeta(0.0) - 1.0);
    ok = head <= 1e-9 && worst_tail <= 1e-9;
    return "|zeta(0)-1|=" + detail::fmt_g(head) + " max tail=" + detail::fmt_g(worst_tail);
  }));

  {
    const BoundCurve curve = opt.bound_curve ? *opt.bound_curve : closed_form_curve(opt.curve_points);
    const auto failing = validate_curve(curve, kAnalyticRegionTolerance);
    for (const char* name : {"bound.samples_in_range", "bound.non_increasing", "bound.zero_beyond_ln_2sqrt3",
                             "bound.matches_closed_form"}) {
      const bool bad = std::find(failing.begin(), failing.end(), name) != failing.end();
      out.push_back({name, !bad, std::to_string(curve.samples.size()) + " samples, source " + to_string(curve.source)});
    }
  }

  {
    std::optional<SimplexGrid> grid;
    try {
      grid.emplace(opt.oracle_resolution);
    } catch (const std::exception&) {
    }
    out.push_back(detail::run_invariant("bound.oracle_agreement", [&](bool& ok) {
      if (!grid) throw std::invalid_argument("invalid oracle resolution");
      double worst = 0.0;
      for (int i = 0; i < opt.oracle_points; ++i) {
        const double c = kMaxMutualInformation * i / std::max(1, opt.oracle_points - 1);
        worst = std::max(worst, std::abs(grid->oracle_zeta(c, opt.oracle_band) - zeta(c)));
      }
      ok = worst <= opt.oracle_tolerance;
      return "max deviation " + detail::fmt_g(worst) + " at resolution " + std::to_string(opt.oracle_resolution);
    }));
    out.push_back(detail::run_invariant("bound.oracle_soundness", [&](bool& ok) {
      if (!grid) throw std::invalid_argument("invalid oracle resolution");
      const auto s = oracle_soundness(*grid, kAnalyticRegionTolerance);
      ok = s.violations == 0;
      return std::to_string(s.violations) + " violations in " + std::to_string(s.tuples) +
             " tuples, worst margin " + detail::fmt_g(s.worst_margin);
    }));
  }

  out.push_back(detail::run_invariant("measures.red_curve", [](bool& ok) {
    detail::FamilyCheck acc;
    for (int i = 0; i <= 100; ++i) {
      const double p = 0.005 * i;
      acc = detail::check_family_point(p, 1.0 - p, acc);
    }
    ok = acc.worst_closed_form <= 1e-9 && acc.worst_margin >= -kAnalyticRegionTolerance;
    return "closed-form gap " + detail::fmt_g(acc.worst_closed_form) + ", worst margin " +
           detail::fmt_g(acc.worst_margin);
  }));

  out.push_back(detail::run_invariant("measures.two_parameter_grid", [](bool& ok) {
    detail::FamilyCheck acc;
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) acc = detail::check_family_point(i / 20.0, j / 20.0, acc);
    ok = acc.worst_closed_form <= 1e-9 && acc.worst_margin >= -kAnalyticRegionTolerance;
    return "closed-form gap " + detail::fmt_g(acc.worst_closed_form) + ", worst margin " +
           detail::fmt_g(acc.worst_margin);
  }));

  out.push_back(detail::run_invariant("measures.spin_flip_spectrum", [&](bool& ok) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      const double p = u(rng), q = u(rng);
      const auto rho_a = partial_trace(cc_family(p, q), {0, 1});
      const auto mu = spin_flip_eigenvalues(rho_a);
      const auto expected = closed_form_spin_flip_eigenvalues(p, q);
      for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(mu[k] - expected[k]));
    }
    ok = worst <= 1e-10;
    return "max eigenvalue gap " + detail::fmt_g(worst);
  }));

  out.push_back(detail::run_invariant("measures.concurrence_root", [](bool& ok) {
    const double root = timebin_concurrence_root();
    ok = root > 0.3015 && root < 0.3020;
    return "root at p=" + detail::fmt_g(root);
  }));

  out.push_back(detail::run_invariant("tomo.exact_reconstruction", [](bool& ok) {
    double worst = 1.0;
    for (const auto& a : reference_angles()) {
      ExperimentOptions o;
      o.exact = true;
      worst = std::min(worst, run_experiment(a.radians(), o).result.fidelity_to_target);
    }
    ok = worst >= 1.0 - 1e-9;
    return "min fidelity " + detail::fmt_g(worst);
  }));

  out.push_back(detail::run_invariant("tomo.record_roundtrip", [&](bool& ok) {
    TomographyDataset d = simulate_tomography(experimental_state(std::numbers::pi / 8), 500, opt.seed);
    d.theta = std::numbers::pi / 8;
    d.p = StateParams::from_theta(d.theta).p;
    const std::string text = to_text(d);
    ok = to_text(from_text(text)) == text;
    return std::to_string(text.size()) + " bytes";
  }));

  return out;
}

inline bool all_passed(const std::vector<InvariantResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.passed; });
}

}  // namespace qtradeoff
