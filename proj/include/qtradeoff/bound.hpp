// bound.hpp
// Concurrence vs. mutual-information tradeoff curve for classical-classical
// states of a two-qubit system A and a four-level system B.
//
// zeta(c) is the largest internal concurrence compatible with mutual
// information c. Its inverse on [0, 1] is the closed form zeta_inv; zeta is
// recovered by bisection. The oracle side scans the descending-ordered
// probability simplex on an integer grid and never touches the closed form.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qtradeoff/measures.hpp"

namespace qtradeoff {

inline const double kLn2 = std::numbers::ln2;
inline const double kMaxMutualInformation = 2.0 * std::numbers::ln2;  // 2 ln 2
inline const double kZeroConcurrenceThreshold = std::log(2.0 * std::sqrt(3.0));  // ln(2 sqrt 3)
inline constexpr double kBisectionTolerance = 1e-12;
inline constexpr double kAnalyticRegionTolerance = 1e-9;
inline constexpr double kDomainSlack = 1e-12;

/// -e ln(e/2) / 2, with mu(0) = 0.
inline double mu_aux(double e) {
  if (e < 0.0) {
    if (e < -kDomainSlack) throw std::domain_error("mu_aux: negative argument");
    e = 0.0;
  }
  return e > 0.0 ? -e * std::log(e / 2.0) / 2.0 : 0.0;
}

/// (sqrt(4 - 3 e^2) - 1) / 3 for |e| <= 2/sqrt 3.
inline double kappa_aux(double e) {
  const double radicand = 4.0 - 3.0 * e * e;
  if (radicand < 0.0) {
    if (radicand < -kDomainSlack) throw std::domain_error("kappa_aux: |e| exceeds 2/sqrt(3)");
    return -1.0 / 3.0;
  }
  return (std::sqrt(radicand) - 1.0) / 3.0;
}

struct ZetaInvBranches {
  double equal_tail;  // lambda_2 = lambda_3 = lambda_4 boundary maximum
  double axis;        // lambda_4 = 0 boundary maximum
};

inline ZetaInvBranches zeta_inv_branches(double e) {
  const double k = kappa_aux(e);
  return {mu_aux(1.0 + e) + mu_aux(1.0 - e) + (1.0 - e) * std::log(3.0) / 2.0,
          mu_aux(1.0 + e - k) + mu_aux(1.0 - e - k) - xlogx(k)};
}

inline void require_concurrence_range(double e, const char* what) {
  if (!(e >= -kDomainSlack && e <= 1.0 + kDomainSlack)) {
    throw std::domain_error(std::string(what) + ": argument outside [0, 1]");
  }
}

/// Mutual information at which the bound allows concurrence e, e in [0, 1].
inline double zeta_inv(double e) {
  require_concurrence_range(e, "zeta_inv");
  e = std::clamp(e, 0.0, 1.0);
  const auto b = zeta_inv_branches(e);
  return std::max(b.equal_tail, b.axis);
}

/// Maximal internal concurrence at mutual information c in [0, 2 ln 2].
inline double zeta(double c) {
  if (!(c >= -kDomainSlack && c <= kMaxMutualInformation + kDomainSlack)) {
    throw std::domain_error("zeta: argument outside [0, 2 ln 2]");
  }
  if (c <= 0.0) return 1.0;
  if (c >= kZeroConcurrenceThreshold) return 0.0;
  double lo = 0.0;  // zeta_inv(lo) >= c
  double hi = 1.0;  // zeta_inv(hi) <= c
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (zeta_inv(mid) >= c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// zeta continued as 1 below c = 0 and 0 above 2 ln 2, for noisy estimates.
inline double zeta_extended(double c) {
  return zeta(std::clamp(c, 0.0, kMaxMutualInformation));
}

// ---------------------------------------------------------------------------
// Simplex grid oracle.

/// An integer composition a >= b >= c >= d >= 0 of the grid resolution N;
/// the tuple is (a, b, c, d) / N.
struct GridTuple {
  std::array<int, 4> counts;
  double entropy;  // h
  double k;        // lambda_1 - lambda_3 - 2 sqrt(lambda_2 lambda_4)

  SpectrumTuple spectrum(int resolution) const {
    const double n = resolution;
    return SpectrumTuple({counts[0] / n, counts[1] / n, counts[2] / n, counts[3] / n});
  }
};

namespace detail {

/// n ln n for n = 0..N.
inline std::vector<double> nlogn_table(int resolution) {
  std::vector<double> t(static_cast<std::size_t>(resolution) + 1, 0.0);
  for (int n = 1; n <= resolution; ++n) t[n] = n * std::log(static_cast<double>(n));
  return t;
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Visits every descending composition whose largest part is in
/// {a_first, a_first + stride, ...} up to N.
template <class Visitor>
void visit_sorted_simplex(int resolution, const std::vector<double>& nlogn, int a_first, int stride,
                          Visitor&& visit) {
  const double n = resolution;
  const double log_n = std::log(n);
  for (int a = a_first; a <= resolution; a += stride) {
    const int rest_a = resolution - a;
    for (int b = ceil_div(rest_a, 3); b <= std::min(a, rest_a); ++b) {
      const int rest_b = rest_a - b;
      for (int c = ceil_div(rest_b, 2); c <= std::min(b, rest_b); ++c) {
        const int d = rest_b - c;
        GridTuple t{{a, b, c, d}, 0.0, 0.0};
        t.entropy = log_n - (nlogn[a] + nlogn[b] + nlogn[c] + nlogn[d]) / n;
        t.k = (a - c - 2.0 * std::sqrt(static_cast<double>(b) * d)) / n;
        visit(t);
      }
    }
  }
}

inline unsigned resolve_threads(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

/// Runs visit_sorted_simplex over interleaved chunks of the largest part,
/// one Partial per worker, and returns the partials in worker order.
template <class Partial, class Visitor>
std::vector<Partial> parallel_scan(int resolution, unsigned threads, Visitor visit) {
  threads = resolve_threads(threads);
  const auto nlogn = nlogn_table(resolution);
  const int a_first = ceil_div(resolution, 4);
  std::vector<Partial> partials(threads);
  auto work = [&](unsigned w) {
    visit_sorted_simplex(resolution, nlogn, a_first + static_cast<int>(w), static_cast<int>(threads),
                         [&](const GridTuple& t) { visit(partials[w], t); });
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  return partials;
}

}  // namespace detail

/// Argmax with a lexicographic tie-break on the integer tuple, so the
/// reduction is independent of how the grid was chunked.
struct OracleResult {
  double value = -INFINITY;
  GridTuple argmax{{0, 0, 0, 0}, 0.0, 0.0};
  std::size_t accepted = 0;

  void offer(double v, const GridTuple& t) {
    ++accepted;
    if (v > value || (v == value && t.counts < argmax.counts)) {
      value = v;
      argmax = t;
    }
  }
  void merge(const OracleResult& o) {
    if (o.accepted == 0) return;
    const std::size_t total = accepted + o.accepted;
    if (o.value > value || (o.value == value && o.argmax.counts < argmax.counts)) {
      value = o.value;
      argmax = o.argmax;
    }
    accepted = total;
  }
};

inline void require_oracle_params(int resolution, double band) {
  if (resolution < 4) throw std::invalid_argument("oracle: resolution must be at least 4");
  if (!(band > 0.0)) throw std::invalid_argument("oracle: band must be positive");
}

/// max over grid tuples with |h - c| <= band of max{0, k}.
inline OracleResult oracle_zeta_scan(double c, int resolution, double band, unsigned threads = 1) {
  require_oracle_params(resolution, band);
  auto partials = detail::parallel_scan<OracleResult>(resolution, threads, [&](OracleResult& r, const GridTuple& t) {
    if (std::abs(t.entropy - c) <= band) r.offer(std::max(0.0, t.k), t);
  });
  OracleResult out;
  for (const auto& p : partials) out.merge(p);
  if (out.accepted == 0) throw std::domain_error("oracle_zeta: no grid tuple inside the entropy band");
  return out;
}

inline double oracle_zeta(double c, int resolution, double band, unsigned threads = 1) {
  return oracle_zeta_scan(c, resolution, band, threads).value;
}

/// max over grid tuples with |k - e| <= band of h.
inline OracleResult oracle_chi_scan(double e, int resolution, double band, unsigned threads = 1) {
  require_oracle_params(resolution, band);
  auto partials = detail::parallel_scan<OracleResult>(resolution, threads, [&](OracleResult& r, const GridTuple& t) {
    if (std::abs(t.k - e) <= band) r.offer(t.entropy, t);
  });
  OracleResult out;
  for (const auto& p : partials) out.merge(p);
  if (out.accepted == 0) throw std::domain_error("oracle_chi: no grid tuple inside the k band");
  return out;
}

inline double oracle_chi(double e, int resolution, double band, unsigned threads = 1) {
  return oracle_chi_scan(e, resolution, band, threads).value;
}

/// Oracle estimate of zeta_inv(e): max h over grid tuples with k >= e.
/// Converges to zeta_inv from below as the resolution grows.
inline double oracle_zeta_inv(double e, int resolution, unsigned threads = 1) {
  require_oracle_params(resolution, 1.0);
  auto partials = detail::parallel_scan<OracleResult>(resolution, threads, [&](OracleResult& r, const GridTuple& t) {
    if (t.k >= e) r.offer(t.entropy, t);
  });
  OracleResult out;
  for (const auto& p : partials) out.merge(p);
  if (out.accepted == 0) throw std::domain_error("oracle_zeta_inv: no grid tuple with k >= e");
  return out.value;
}

inline constexpr int kChiOracleResolution = 400;
inline constexpr double kChiOracleBand = 2e-3;

/// max h subject to k = e on e in [-1/2, 1]. The closed form covers
/// e in [0, 1]; negative e is served by the grid oracle.
inline double chi(double e) {
  if (!(e >= -0.5 - kDomainSlack && e <= 1.0 + kDomainSlack)) {
    throw std::domain_error("chi: argument outside [-1/2, 1]");
  }
  if (e >= 0.0) return zeta_inv(e);
  return oracle_chi(std::max(e, -0.5), kChiOracleResolution, kChiOracleBand);
}

/// Every grid tuple, for repeated queries at small resolution.
class SimplexGrid {
 public:
  explicit SimplexGrid(int resolution) : resolution_(resolution) {
    require_oracle_params(resolution, 1.0);
    const auto nlogn = detail::nlogn_table(resolution);
    detail::visit_sorted_simplex(resolution, nlogn, detail::ceil_div(resolution, 4), 1,
                                 [&](const GridTuple& t) { tuples_.push_back(t); });
  }

  int resolution() const noexcept { return resolution_; }
  const std::vector<GridTuple>& tuples() const noexcept { return tuples_; }

  OracleResult zeta_scan(double c, double band) const {
    OracleResult r;
    for (const auto& t : tuples_)
      if (std::abs(t.entropy - c) <= band) r.offer(std::max(0.0, t.k), t);
    if (r.accepted == 0) throw std::domain_error("oracle_zeta: no grid tuple inside the entropy band");
    return r;
  }
  double oracle_zeta(double c, double band) const { return zeta_scan(c, band).value; }

 private:
  int resolution_;
  std::vector<GridTuple> tuples_;
};

struct SoundnessReport {
  std::size_t tuples = 0;
  std::size_t violations = 0;
  double worst_margin = INFINITY;  // min over tuples of zeta(h) - max{0, k}
  GridTuple worst{{0, 0, 0, 0}, 0.0, 0.0};
};

/// Checks max{0, k(lambda)} <= zeta(h(lambda)) + tolerance on every grid tuple.
inline SoundnessReport oracle_soundness(const SimplexGrid& grid, double tolerance) {
  SoundnessReport r;
  for (const auto& t : grid.tuples()) {
    ++r.tuples;
    const double margin = zeta_extended(t.entropy) - std::max(0.0, t.k);
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst = t;
    }
    if (margin < -tolerance) ++r.violations;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sampled curves and region membership.

enum class BoundSource { closed_form, oracle };

inline const char* to_string(BoundSource s) { return s == BoundSource::closed_form ? "closed_form" : "oracle"; }

struct BoundSample {
  double c;
  double e;
};

struct BoundCurve {
  std::vector<BoundSample> samples;
  BoundSource source = BoundSource::closed_form;
  int grid_resolution = 0;  // oracle only
  double band = 0.0;        // oracle only
  std::string note;
};

inline std::vector<double> mutual_information_grid(int points) {
  if (points < 2) throw std::invalid_argument("curve: at least two sample points required");
  std::vector<double> c(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) c[i] = kMaxMutualInformation * i / (points - 1);
  c.back() = kMaxMutualInformation;
  return c;
}

inline BoundCurve closed_form_curve(int points) {
  BoundCurve curve;
  for (double c : mutual_information_grid(points)) curve.samples.push_back({c, zeta(c)});
  curve.note = "bisection inverse of the closed-form zeta_inv";
  return curve;
}

inline BoundCurve oracle_curve(int points, int resolution, double band) {
  const SimplexGrid grid(resolution);
  BoundCurve curve;
  curve.source = BoundSource::oracle;
  curve.grid_resolution = resolution;
  curve.band = band;
  for (double c : mutual_information_grid(points)) curve.samples.push_back({c, grid.oracle_zeta(c, band)});
  curve.note = "grid scan; chi for negative e is available only from this source";
  return curve;
}

/// Names of the curve invariants that fail; empty when the curve is valid.
/// tolerance bounds the deviation permitted from monotonicity, the zero
/// tail and (for closed_form curves) the closed-form values.
inline std::vector<std::string> validate_curve(const BoundCurve& curve, double tolerance) {
  std::vector<std::string> failures;
  bool range_ok = true, monotone_ok = true, tail_ok = true, closed_ok = true;
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const auto [c, e] = curve.samples[i];
    if (!(c >= -kDomainSlack && c <= kMaxMutualInformation + kDomainSlack && e >= -tolerance &&
          e <= 1.0 + tolerance)) {
      range_ok = false;
      continue;
    }
    if (i > 0 && e > curve.samples[i - 1].e + tolerance) monotone_ok = false;
    if (c >= kZeroConcurrenceThreshold && std::abs(e) > tolerance) tail_ok = false;
    if (curve.source == BoundSource::closed_form && std::abs(e - zeta(c)) > tolerance) closed_ok = false;
  }
  if (!range_ok) failures.emplace_back("bound.samples_in_range");
  if (!monotone_ok) failures.emplace_back("bound.non_increasing");
  if (!tail_ok) failures.emplace_back("bound.zero_beyond_ln_2sqrt3");
  if (!closed_ok) failures.emplace_back("bound.matches_closed_form");
  return failures;
}

struct RegionVerdict {
  BoundSample point;
  bool inside_separable_region;
  double margin;  // zeta(c) - e
};

inline RegionVerdict region_check(BoundSample point, double tolerance = kAnalyticRegionTolerance) {
  if (!std::isfinite(point.c) || !std::isfinite(point.e)) {
    throw std::invalid_argument("region_check: non-finite point");
  }
  const double margin = zeta_extended(point.c) - point.e;
  return {point, margin >= -tolerance, margin};
}

inline std::vector<RegionVerdict> region_check(const std::vector<BoundSample>& points,
                                               double tolerance = kAnalyticRegionTolerance) {
  std::vector<RegionVerdict> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(region_check(pt, tolerance));
  return out;
}

/// Membership for a noisy estimate with standard errors: the point passes
/// when the corner (c - k sigma_c, e - k sigma_e) of its error box lies
/// under the curve. The margin is reported at that corner.
inline RegionVerdict region_check_with_errors(BoundSample point, double sigma_c, double sigma_e,
                                              double k_sigma = 3.0) {
  const BoundSample corner{point.c - k_sigma * sigma_c, point.e - k_sigma * sigma_e};
  const auto v = region_check(corner, kAnalyticRegionTolerance);
  return {point, v.inside_separable_region, v.margin};
}

}  // namespace qtradeoff
