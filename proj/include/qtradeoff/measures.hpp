// measures.hpp
// Entropies, mutual information, concurrence, fidelity and the closed forms
// for the classical-classical families. All entropies are in nats.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtradeoff/qmat.hpp"
#include "qtradeoff/states.hpp"

namespace qtradeoff {

inline constexpr double kProbabilitySumTolerance = 1e-9;
inline constexpr double kSpectrumSumTolerance = 1e-12;

/// x ln x with 0 ln 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Four probabilities in descending order summing to one.
class SpectrumTuple {
 public:
  explicit SpectrumTuple(std::array<double, 4> lambdas) : l_(lambdas) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(l_[i] >= 0.0)) throw std::invalid_argument("SpectrumTuple: negative entry");
      if (i > 0 && l_[i] > l_[i - 1]) throw std::invalid_argument("SpectrumTuple: not in descending order");
    }
    const double total = l_[0] + l_[1] + l_[2] + l_[3];
    if (std::abs(total - 1.0) > kSpectrumSumTolerance) {
      throw std::invalid_argument("SpectrumTuple: entries do not sum to 1");
    }
  }

  static SpectrumTuple from_unsorted(std::array<double, 4> lambdas) {
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>{});
    return SpectrumTuple(lambdas);
  }

  double operator[](std::size_t i) const { return l_[i]; }
  const std::array<double, 4>& values() const noexcept { return l_; }

 private:
  std::array<double, 4> l_;
};

/// -sum p ln p.
inline double shannon_entropy(std::span<const double> probs) {
  double total = 0.0;
  double h = 0.0;
  for (double x : probs) {
    if (x < -kNegativeEigenTolerance || !std::isfinite(x)) {
      throw std::invalid_argument("shannon_entropy: negative or non-finite probability");
    }
    total += x;
    h -= xlogx(std::max(x, 0.0));
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw std::invalid_argument("shannon_entropy: probabilities do not sum to 1");
  }
  return h;
}

inline double shannon_entropy(std::initializer_list<double> probs) {
  return shannon_entropy(std::span<const double>(probs.begin(), probs.size()));
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return shannon_entropy(eigenvalues(rho.matrix()));
}

/// Subsystem indices on the A side; B is the complement.
struct Bipartition {
  std::vector<std::size_t> a_side;
};

struct MeasureReport {
  double mutual_information = 0.0;
  double concurrence = 0.0;
  double entropy_A = 0.0;
  double entropy_B = 0.0;
  double entropy_AB = 0.0;
};

namespace detail {

inline std::vector<std::size_t> complement(const Bipartition& cut, std::size_t factors) {
  std::vector<bool> in_a(factors, false);
  for (std::size_t k : cut.a_side) {
    if (k >= factors) throw std::invalid_argument("bipartition: subsystem index out of range");
    if (in_a[k]) throw std::invalid_argument("bipartition: duplicate subsystem index");
    in_a[k] = true;
  }
  std::vector<std::size_t> b;
  for (std::size_t k = 0; k < factors; ++k)
    if (!in_a[k]) b.push_back(k);
  if (cut.a_side.empty() || b.empty()) {
    throw std::invalid_argument("bipartition: both sides must be nonempty");
  }
  return b;
}

}  // namespace detail

struct EntropyTriple {
  double a, b, ab;
};

inline EntropyTriple cut_entropies(const DensityMatrix& rho, const Bipartition& cut) {
  const auto b_side = detail::complement(cut, rho.dims().size());
  return {von_neumann_entropy(partial_trace(rho, cut.a_side)),
          von_neumann_entropy(partial_trace(rho, b_side)), von_neumann_entropy(rho)};
}

/// S(rho_A) + S(rho_B) - S(rho).
inline double mutual_information(const DensityMatrix& rho, const Bipartition& cut) {
  const auto s = cut_entropies(rho, cut);
  return s.a + s.b - s.ab;
}

/// sigma x sigma with sigma = -|1><0| + |0><1|.
inline ComplexMatrix spin_flip_two_qubit() {
  const ComplexMatrix sigma{{0.0, 1.0}, {-1.0, 0.0}};
  return kron(sigma, sigma);
}

/// Eigenvalues mu_i of rho (s x s) rho^* (s x s), obtained from the similar
/// Hermitian form sqrt(rho) (s x s) rho^* (s x s) sqrt(rho). Descending.
inline std::vector<double> spin_flip_eigenvalues(const DensityMatrix& rho_A) {
  if (rho_A.dims() != std::vector<std::size_t>{2, 2}) {
    throw std::invalid_argument("concurrence: expected a two-qubit state");
  }
  const ComplexMatrix flip = spin_flip_two_qubit();
  const ComplexMatrix root = matrix_sqrt(rho_A.matrix());
  const ComplexMatrix tilde = flip * rho_A.matrix().conjugate() * flip;
  auto mu = eigenvalues((root * tilde * root).hermitian_part());
  const double floor = kSpectralNoiseFloor * std::max(1.0, mu.front());
  for (double& m : mu) {
    if (m < -kNegativeEigenTolerance) {
      throw std::domain_error("concurrence: spin-flip spectrum has a negative eigenvalue");
    }
    if (m <= floor) m = 0.0;
  }
  return mu;
}

/// max{0, 2 max sqrt(mu) - sum sqrt(mu)}.
inline double concurrence(const DensityMatrix& rho_A) {
  const auto mu = spin_flip_eigenvalues(rho_A);
  double largest = 0.0;
  double total = 0.0;
  for (double m : mu) {
    const double r = std::sqrt(m);
    largest = std::max(largest, r);
    total += r;
  }
  return std::max(0.0, 2.0 * largest - total);
}

/// Mutual information across a cut plus the concurrence of the two-qubit
/// reduced state on internal_pair.
inline MeasureReport measure_report(const DensityMatrix& rho, const Bipartition& cut,
                                    std::span<const std::size_t> internal_pair) {
  const auto s = cut_entropies(rho, cut);
  MeasureReport r;
  r.entropy_A = s.a;
  r.entropy_B = s.b;
  r.entropy_AB = s.ab;
  r.mutual_information = s.a + s.b - s.ab;
  r.concurrence = concurrence(partial_trace(rho, internal_pair));
  return r;
}

/// Report for a state whose first two factors form the internal system A.
inline MeasureReport measure_report(const DensityMatrix& rho) {
  const std::array<std::size_t, 2> pair{0, 1};
  return measure_report(rho, Bipartition{{0, 1}}, pair);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dimension() != sigma.dimension()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const ComplexMatrix root = matrix_sqrt(rho.matrix());
  const auto spectrum = eigenvalues((root * sigma.matrix() * root).hermitian_part());
  const double floor = kSpectralNoiseFloor * std::max(1.0, spectrum.front());
  double t = 0.0;
  for (double x : spectrum)
    if (x > floor) t += std::sqrt(x);
  return t * t;
}

/// -p ln p - (1-p) ln(1-p) - q ln q - (1-q) ln(1-q).
inline double closed_form_I(double p, double q) {
  require_probability(p, "closed_form_I: p");
  require_probability(q, "closed_form_I: q");
  return -xlogx(p) - xlogx(1.0 - p) - xlogx(q) - xlogx(1.0 - q);
}

/// max{0, (1 - 2 qt)(1 - p) - 2 p sqrt(qt (1 - qt))}, qt = min{q, 1 - q}.
inline double closed_form_E(double p, double q) {
  require_probability(p, "closed_form_E: p");
  require_probability(q, "closed_form_E: q");
  const double qt = std::min(q, 1.0 - q);
  return std::max(0.0, (1.0 - 2.0 * qt) * (1.0 - p) - 2.0 * p * std::sqrt(qt * (1.0 - qt)));
}

/// Mutual information of the time-bin state: -2p ln p - 2(1-p) ln(1-p).
inline double timebin_mutual_information(double p) {
  require_probability(p, "timebin_mutual_information: p");
  return -2.0 * xlogx(p) - 2.0 * xlogx(1.0 - p);
}

/// Internal concurrence of the time-bin state:
/// max{0, (1-2p)(1-p) - 2 sqrt(p^3 (1-p))}.
inline double timebin_concurrence(double p) {
  require_probability(p, "timebin_concurrence: p");
  return std::max(0.0, (1.0 - 2.0 * p) * (1.0 - p) - 2.0 * std::sqrt(p * p * p * (1.0 - p)));
}

/// Analytic spin-flip spectrum of the reduced two-parameter state:
/// {qt^2 (1-p)^2, (1-qt)^2 (1-p)^2, p^2 qt (1-qt), p^2 qt (1-qt)}, descending.
inline std::array<double, 4> closed_form_spin_flip_eigenvalues(double p, double q) {
  const double qt = std::min(q, 1.0 - q);
  std::array<double, 4> mu{qt * qt * (1.0 - p) * (1.0 - p), (1.0 - qt) * (1.0 - qt) * (1.0 - p) * (1.0 - p),
                           p * p * qt * (1.0 - qt), p * p * qt * (1.0 - qt)};
  std::sort(mu.begin(), mu.end(), std::greater<>{});
  return mu;
}

/// lambda_1 - lambda_3 - 2 sqrt(lambda_2 lambda_4).
inline double k_function(const SpectrumTuple& lam) {
  return lam[0] - lam[2] - 2.0 * std::sqrt(lam[1] * lam[3]);
}

inline double shannon_entropy(const SpectrumTuple& lam) { return shannon_entropy(lam.values()); }

}  // namespace qtradeoff
