// states.hpp
// State and isometry constructors for the time-bin classical-classical
// states: SPDC source, dephasing, the four local isometries, the mixed
// four-qubit state and the two-parameter family.
//
// Basis convention: qubit order [A-pol, A-path, B-pol, B-path], |H> = up-path
// = |0>, |V> = down-path = |1>; the 16x16 index is
// 8*a_pol + 4*a_path + 2*b_pol + b_path.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qtradeoff/qmat.hpp"

namespace qtradeoff {

inline constexpr double kAngleTolerance = 1e-12;

struct StateParams {
  double theta = 0.0;
  double p = 1.0;
  double q = 0.0;

  /// Experimental constraint p = cos^2(theta), q = 1 - p.
  static StateParams from_theta(double theta) {
    if (!(theta >= -kAngleTolerance && theta <= std::numbers::pi / 2 + kAngleTolerance)) {
      throw std::invalid_argument("StateParams: theta outside [0, pi/2]");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {theta, c * c, s * s};
  }
};

/// An angle written as a rational multiple of pi, e.g. 9/32 for 9 pi / 32.
struct PiFraction {
  long numerator = 0;
  long denominator = 1;

  double radians() const { return std::numbers::pi * static_cast<double>(numerator) / static_cast<double>(denominator); }
  std::string to_string() const {
    return denominator == 1 ? std::to_string(numerator) : std::to_string(numerator) + "/" + std::to_string(denominator);
  }
  friend bool operator==(const PiFraction&, const PiFraction&) = default;
};

/// Source angles of the twelve prepared states.
inline std::vector<PiFraction> reference_angles() {
  return {{0, 1}, {1, 16}, {1, 8}, {3, 16}, {1, 4}, {9, 32}, {11, 32}, {3, 8}, {13, 32}, {7, 16}, {15, 32}, {1, 2}};
}

inline void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

namespace kets {

inline Ket basis(std::size_t dim, std::size_t index) {
  Ket v(dim);
  v.at(index) = 1.0;
  return v;
}

/// Two-qubit computational basis state |ab>.
inline Ket two_qubit(int a, int b) { return basis(4, static_cast<std::size_t>(2 * a + b)); }

/// (|01> + |10>)/sqrt 2
inline Ket plus() {
  const double r = 1.0 / std::numbers::sqrt2;
  return {0.0, r, r, 0.0};
}

/// (|01> - |10>)/sqrt 2
inline Ket minus() {
  const double r = 1.0 / std::numbers::sqrt2;
  return {0.0, r, -r, 0.0};
}

// B-side labels as two-qubit (pol, path) states; as a four-level system they
// are the basis indices 1, 2, 0, 3.
inline Ket alpha() { return two_qubit(0, 1); }
inline Ket beta() { return two_qubit(1, 0); }
inline Ket gamma() { return two_qubit(0, 0); }
inline Ket delta() { return two_qubit(1, 1); }

}  // namespace kets

enum class IsometryLabel { U1, U2, V1, V2 };

inline std::string_view to_string(IsometryLabel label) {
  switch (label) {
    case IsometryLabel::U1: return "U1";
    case IsometryLabel::U2: return "U2";
    case IsometryLabel::V1: return "V1";
    case IsometryLabel::V2: return "V2";
  }
  return "?";
}

inline IsometryLabel parse_isometry_label(std::string_view name) {
  if (name == "U1") return IsometryLabel::U1;
  if (name == "U2") return IsometryLabel::U2;
  if (name == "V1") return IsometryLabel::V1;
  if (name == "V2") return IsometryLabel::V2;
  throw std::invalid_argument("unknown isometry label '" + std::string(name) + "'");
}

struct Isometry {
  ComplexMatrix matrix;  // 4x2, maps a polarization qubit into (pol, path)
  IsometryLabel label;
};

inline Isometry isometry(IsometryLabel label) {
  std::array<Ket, 2> images;
  switch (label) {
    case IsometryLabel::U1: images = {kets::two_qubit(1, 1), kets::plus()}; break;
    case IsometryLabel::U2: images = {kets::two_qubit(0, 0), kets::minus()}; break;
    case IsometryLabel::V1: images = {kets::two_qubit(0, 0), kets::two_qubit(1, 0)}; break;
    case IsometryLabel::V2: images = {kets::two_qubit(0, 1), kets::two_qubit(1, 1)}; break;
    default: throw std::invalid_argument("unknown isometry label");
  }
  return {ComplexMatrix::from_columns(images), label};
}

inline Isometry isometry(std::string_view name) { return isometry(parse_isometry_label(name)); }

/// Projector onto cos(theta)|00> + sin(theta)|11>.
inline DensityMatrix spdc_state(double theta) {
  if (!(theta >= -kAngleTolerance && theta <= std::numbers::pi / 2 + kAngleTolerance)) {
    throw std::invalid_argument("spdc_state: theta outside [0, pi/2]");
  }
  const Ket psi{std::cos(theta), 0.0, 0.0, std::sin(theta)};
  return DensityMatrix(ComplexMatrix::projector(psi), {2, 2});
}

/// Complete decoherence in the computational basis.
inline DensityMatrix dephase(const DensityMatrix& rho) {
  if (rho.dims() != std::vector<std::size_t>{2, 2}) {
    throw std::invalid_argument("dephase: expected a two-qubit state");
  }
  ComplexMatrix m(4, 4);
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = rho(i, i).real();
  return DensityMatrix(std::move(m), {2, 2});
}

inline constexpr double kDiagonalTolerance = 1e-12;

/// (1-p)(U1 x V1) rho_d (U1 x V1)^dagger + p (U2 x V2) rho_d (U2 x V2)^dagger,
/// returned with dims [2,2,2,2].
inline DensityMatrix timebin_mix(const DensityMatrix& rho_d, double p) {
  if (rho_d.dims() != std::vector<std::size_t>{2, 2}) {
    throw std::invalid_argument("timebin_mix: expected a two-qubit state");
  }
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      if (r != c && std::abs(rho_d(r, c)) > kDiagonalTolerance) {
        throw std::invalid_argument("timebin_mix: input state is not fully dephased");
      }
  require_probability(p, "timebin_mix: p");

  const ComplexMatrix long_path =
      kron(isometry(IsometryLabel::U1).matrix, isometry(IsometryLabel::V1).matrix);
  const ComplexMatrix short_path =
      kron(isometry(IsometryLabel::U2).matrix, isometry(IsometryLabel::V2).matrix);
  ComplexMatrix out = (long_path * rho_d.matrix() * long_path.adjoint()) * Complex(1.0 - p);
  out += (short_path * rho_d.matrix() * short_path.adjoint()) * Complex(p);
  return DensityMatrix(std::move(out), {2, 2, 2, 2});
}

/// The four-qubit experimental state for a source angle theta, p = cos^2 theta.
inline DensityMatrix experimental_state(double theta) {
  return timebin_mix(dephase(spdc_state(theta)), StateParams::from_theta(theta).p);
}

/// Two-parameter classical-classical family with B as one four-level factor
/// (dims [2,2,4]).
inline DensityMatrix cc_family(double p, double q) {
  require_probability(p, "cc_family: p");
  require_probability(q, "cc_family: q");
  const std::array<std::pair<double, Ket>, 4> terms{{
      {p * (1.0 - q), kron(kets::two_qubit(0, 0), kets::alpha())},
      {(1.0 - p) * q, kron(kets::plus(), kets::beta())},
      {p * q, kron(kets::two_qubit(1, 1), kets::gamma())},
      {(1.0 - p) * (1.0 - q), kron(kets::minus(), kets::delta())},
  }};
  ComplexMatrix m(16, 16);
  for (const auto& [w, v] : terms) m += ComplexMatrix::projector(v) * Complex(w);
  return DensityMatrix(std::move(m), {2, 2, 4});
}

/// Relabels a [2,2,4] state so B is two qubits (pol, path): the four-level
/// index j maps to (j >> 1, j & 1), which leaves the matrix unchanged.
inline DensityMatrix split_b_into_qubits(const DensityMatrix& rho) {
  if (rho.dims() != std::vector<std::size_t>{2, 2, 4}) {
    throw std::invalid_argument("split_b_into_qubits: expected dims [2,2,4]");
  }
  return rho.with_dims({2, 2, 2, 2});
}

/// Inverse of split_b_into_qubits.
inline DensityMatrix merge_b_qubits(const DensityMatrix& rho) {
  if (rho.dims() != std::vector<std::size_t>{2, 2, 2, 2}) {
    throw std::invalid_argument("merge_b_qubits: expected dims [2,2,2,2]");
  }
  return rho.with_dims({2, 2, 4});
}

inline constexpr double kOrthonormalTolerance = 1e-10;

inline void require_orthonormal(const std::vector<Ket>& basis, const char* what) {
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (basis[i].size() != basis.front().size()) {
        throw std::invalid_argument(std::string(what) + ": kets of different length");
      }
      const Complex expected = i == j ? 1.0 : 0.0;
      if (std::abs(inner_product(basis[i], basis[j]) - expected) > kOrthonormalTolerance) {
        throw std::invalid_argument(std::string(what) + ": basis is not orthonormal");
      }
    }
}

inline constexpr double kWeightSumTolerance = 1e-10;

/// sum_ij w_ij |a_i><a_i| x |b_j><b_j|. weights is row-major with
/// a_basis.size() rows and b_basis.size() columns.
inline DensityMatrix classical_classical(const std::vector<double>& weights,
                                         const std::vector<Ket>& a_basis,
                                         const std::vector<Ket>& b_basis) {
  if (a_basis.empty() || b_basis.empty()) {
    throw std::invalid_argument("classical_classical: empty basis");
  }
  if (weights.size() != a_basis.size() * b_basis.size()) {
    throw std::invalid_argument("classical_classical: weight table has the wrong size");
  }
  require_orthonormal(a_basis, "classical_classical: A basis");
  require_orthonormal(b_basis, "classical_classical: B basis");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("classical_classical: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("classical_classical: weights do not sum to 1");
  }
  const std::size_t da = a_basis.front().size();
  const std::size_t db = b_basis.front().size();
  ComplexMatrix m(da * db, da * db);
  for (std::size_t i = 0; i < a_basis.size(); ++i)
    for (std::size_t j = 0; j < b_basis.size(); ++j) {
      const double w = weights[i * b_basis.size() + j];
      if (w == 0.0) continue;
      m += ComplexMatrix::projector(kron(a_basis[i], b_basis[j])) * Complex(w);
    }
  return DensityMatrix(std::move(m), {da, db});
}

}  // namespace qtradeoff
