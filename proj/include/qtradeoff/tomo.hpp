// tomo.hpp
// Simulated four-qubit state tomography: 81 local Pauli settings with 16
// outcomes each, seeded shot-noise sampling, linear inversion and projection
// onto the physical set (optionally refined by maximum likelihood), plus a
// visibility/depolarizing imperfection model.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qtradeoff/measures.hpp"
#include "qtradeoff/qmat.hpp"
#include "qtradeoff/states.hpp"

namespace qtradeoff {

inline constexpr std::size_t kTomographyQubits = 4;
inline constexpr std::size_t kOutcomes = 16;
inline constexpr std::size_t kSettings = 81;
inline constexpr std::size_t kPauliStrings = 256;

enum class Basis : std::uint8_t { X = 0, Y = 1, Z = 2 };

/// One local measurement basis per qubit, in qubit order
/// [A-pol, A-path, B-pol, B-path].
struct TomographySetting {
  std::array<Basis, kTomographyQubits> bases{Basis::Z, Basis::Z, Basis::Z, Basis::Z};

  /// Base-3 index with qubit 0 most significant.
  std::size_t index() const {
    std::size_t i = 0;
    for (Basis b : bases) i = 3 * i + static_cast<std::size_t>(b);
    return i;
  }
  static TomographySetting from_index(std::size_t index) {
    if (index >= kSettings) throw std::out_of_range("TomographySetting: index out of range");
    TomographySetting s;
    for (std::size_t k = kTomographyQubits; k-- > 0;) {
      s.bases[k] = static_cast<Basis>(index % 3);
      index /= 3;
    }
    return s;
  }

  std::string to_string() const {
    std::string out;
    for (Basis b : bases) out.push_back("XYZ"[static_cast<int>(b)]);
    return out;
  }
  static TomographySetting parse(std::string_view text) {
    if (text.size() != kTomographyQubits) throw std::invalid_argument("TomographySetting: expected four bases");
    TomographySetting s;
    for (std::size_t k = 0; k < kTomographyQubits; ++k) {
      switch (text[k]) {
        case 'X': s.bases[k] = Basis::X; break;
        case 'Y': s.bases[k] = Basis::Y; break;
        case 'Z': s.bases[k] = Basis::Z; break;
        default: throw std::invalid_argument("TomographySetting: unknown basis '" + std::string(text) + "'");
      }
    }
    return s;
  }
  friend bool operator==(const TomographySetting&, const TomographySetting&) = default;
};

inline std::vector<TomographySetting> all_settings() {
  std::vector<TomographySetting> out;
  out.reserve(kSettings);
  for (std::size_t i = 0; i < kSettings; ++i) out.push_back(TomographySetting::from_index(i));
  return out;
}

/// Outcome bit of qubit k in a joint outcome index (qubit 0 most significant).
constexpr int outcome_bit(std::size_t outcome, std::size_t qubit) {
  return static_cast<int>((outcome >> (kTomographyQubits - 1 - qubit)) & 1U);
}

namespace detail {

/// Rows are the bras of the measurement eigenbasis: outcome 0 is the +1
/// eigenstate, outcome 1 the -1 eigenstate.
inline ComplexMatrix basis_rotation(Basis b) {
  const double r = 1.0 / std::numbers::sqrt2;
  const Complex i{0.0, 1.0};
  switch (b) {
    case Basis::X: return ComplexMatrix{{r, r}, {r, -r}};
    case Basis::Y: return ComplexMatrix{{r, -i * r}, {r, i * r}};
    case Basis::Z: break;
  }
  return ComplexMatrix::identity(2);
}

inline ComplexMatrix setting_rotation(const TomographySetting& s) {
  ComplexMatrix w = basis_rotation(s.bases[0]);
  for (std::size_t k = 1; k < kTomographyQubits; ++k) w = kron(w, basis_rotation(s.bases[k]));
  return w;
}

}  // namespace detail

using OutcomeProbabilities = std::array<double, kOutcomes>;
using OutcomeCounts = std::array<std::uint64_t, kOutcomes>;

inline void require_four_qubits(const DensityMatrix& rho, const char* what) {
  if (rho.dimension() != kOutcomes) throw std::invalid_argument(std::string(what) + ": expected a four-qubit state");
}

/// Born-rule probabilities of the 16 joint outcomes of a setting.
inline OutcomeProbabilities born_probabilities(const DensityMatrix& rho, const TomographySetting& setting) {
  require_four_qubits(rho, "born_probabilities");
  const ComplexMatrix w = detail::setting_rotation(setting);
  const ComplexMatrix rotated = w * rho.matrix() * w.adjoint();
  OutcomeProbabilities probs{};
  for (std::size_t j = 0; j < kOutcomes; ++j) probs[j] = std::max(0.0, rotated(j, j).real());
  return probs;
}

// ---------------------------------------------------------------------------
// Imperfection model.

struct NoiseParams {
  double visibility = 1.0;    // coherence scale on each path qubit
  double depolarizing = 0.0;  // per-qubit depolarizing probability

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

/// Off-diagonal scale v = (r - 1) / (r + 1) of an interferometer with
/// contrast r:1.
inline double visibility_from_contrast(double ratio) {
  if (!(ratio >= 1.0)) throw std::invalid_argument("visibility_from_contrast: ratio must be >= 1");
  return (ratio - 1.0) / (ratio + 1.0);
}

inline constexpr std::array<std::size_t, 2> kPathQubits{1, 3};

inline DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseParams& noise) {
  require_four_qubits(rho, "apply_noise");
  require_probability(noise.visibility, "apply_noise: visibility");
  require_probability(noise.depolarizing, "apply_noise: depolarizing");
  ComplexMatrix m = rho.matrix();
  if (noise.visibility != 1.0) {
    for (std::size_t i = 0; i < kOutcomes; ++i)
      for (std::size_t j = 0; j < kOutcomes; ++j)
        for (std::size_t q : kPathQubits)
          if (outcome_bit(i, q) != outcome_bit(j, q)) m(i, j) *= noise.visibility;
  }
  if (noise.depolarizing != 0.0) {
    const double p = noise.depolarizing;
    for (std::size_t q = 0; q < kTomographyQubits; ++q) {
      const std::size_t mask = std::size_t{1} << (kTomographyQubits - 1 - q);
      ComplexMatrix next(kOutcomes, kOutcomes);
      for (std::size_t i = 0; i < kOutcomes; ++i)
        for (std::size_t j = 0; j < kOutcomes; ++j) {
          next(i, j) = (1.0 - p) * m(i, j);
          if (((i ^ j) & mask) == 0) {
            const std::size_t i0 = i & ~mask, j0 = j & ~mask;
            next(i, j) += p * 0.5 * (m(i0, j0) + m(i0 | mask, j0 | mask));
          }
        }
      m = std::move(next);
    }
  }
  return DensityMatrix(std::move(m), rho.dims());
}

// ---------------------------------------------------------------------------
// Shot noise.

enum class CountModel { multinomial, poisson };

/// Independent RNG stream seed for (seed, a, b), via splitmix64 finalizers.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Multinomial (or independent Poisson) draw, deterministic in seed.
inline OutcomeCounts sample_counts(const OutcomeProbabilities& probs, std::uint64_t shots, std::uint64_t seed,
                                   CountModel model = CountModel::multinomial) {
  if (shots < 1) throw std::invalid_argument("sample_counts: shots must be positive");
  std::mt19937_64 rng(seed);
  OutcomeCounts counts{};
  if (model == CountModel::poisson) {
    for (std::size_t j = 0; j < kOutcomes; ++j) {
      const double mean = static_cast<double>(shots) * std::max(0.0, probs[j]);
      if (mean > 0.0) counts[j] = std::poisson_distribution<std::uint64_t>(mean)(rng);
    }
    return counts;
  }
  double mass = 0.0;
  for (double p : probs) mass += std::max(0.0, p);
  std::uint64_t remaining = shots;
  for (std::size_t j = 0; j + 1 < kOutcomes && remaining > 0; ++j) {
    const double pj = std::max(0.0, probs[j]);
    const double conditional = mass > 0.0 ? std::clamp(pj / mass, 0.0, 1.0) : 0.0;
    std::uint64_t k = 0;
    if (conditional >= 1.0) {
      k = remaining;
    } else if (conditional > 0.0) {
      k = std::binomial_distribution<std::uint64_t>(remaining, conditional)(rng);
    }
    counts[j] = k;
    remaining -= k;
    mass -= pj;
  }
  counts[kOutcomes - 1] += remaining;
  return counts;
}

// ---------------------------------------------------------------------------
// Records and their text format.

struct TomographyRecord {
  TomographySetting setting;
  OutcomeCounts counts{};
  std::uint64_t total_shots = 0;
  std::uint64_t seed = 0;
  NoiseParams noise;

  friend bool operator==(const TomographyRecord&, const TomographyRecord&) = default;
};

/// A complete run: header parameters plus one record per setting.
struct TomographyDataset {
  double theta = 0.0;
  double p = 1.0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  NoiseParams noise;
  std::vector<TomographyRecord> records;

  friend bool operator==(const TomographyDataset&, const TomographyDataset&) = default;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::runtime_error("tomography record: bad number '" + std::string(s) + "'");
  }
  return x;
}

inline std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t x = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::runtime_error("tomography record: bad integer '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace detail

inline constexpr std::string_view kRecordMagic = "qtradeoff-tomography v1";

/// Line format: magic line; header "theta= p= shots= seed= visibility=
/// depolarizing="; then one "<bases> <16 counts>" line per setting. Floats
/// use the shortest round-trip representation.
inline void write_dataset(std::ostream& os, const TomographyDataset& d) {
  os << kRecordMagic << '\n';
  os << "theta=" << detail::format_double(d.theta) << " p=" << detail::format_double(d.p) << " shots=" << d.shots
     << " seed=" << d.seed << " visibility=" << detail::format_double(d.noise.visibility)
     << " depolarizing=" << detail::format_double(d.noise.depolarizing) << '\n';
  for (const auto& r : d.records) {
    os << r.setting.to_string();
    for (auto c : r.counts) os << ' ' << c;
    os << '\n';
  }
}

inline std::string to_text(const TomographyDataset& d) {
  std::ostringstream os;
  write_dataset(os, d);
  return os.str();
}

inline TomographyDataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRecordMagic) {
    throw std::runtime_error("tomography record: missing magic line");
  }
  if (!std::getline(is, line)) throw std::runtime_error("tomography record: missing header");
  TomographyDataset d;
  {
    std::istringstream hs(line);
    const std::array<std::string_view, 6> keys{"theta", "p", "shots", "seed", "visibility", "depolarizing"};
    std::string token;
    for (auto key : keys) {
      if (!(hs >> token)) throw std::runtime_error("tomography record: truncated header");
      const auto eq = token.find('=');
      if (eq == std::string::npos || std::string_view(token).substr(0, eq) != key) {
        throw std::runtime_error("tomography record: expected header key '" + std::string(key) + "'");
      }
      const std::string_view value = std::string_view(token).substr(eq + 1);
      if (key == "theta") d.theta = detail::parse_double(value);
      if (key == "p") d.p = detail::parse_double(value);
      if (key == "shots") d.shots = detail::parse_u64(value);
      if (key == "seed") d.seed = detail::parse_u64(value);
      if (key == "visibility") d.noise.visibility = detail::parse_double(value);
      if (key == "depolarizing") d.noise.depolarizing = detail::parse_double(value);
    }
    if (hs >> token) throw std::runtime_error("tomography record: unexpected header token '" + token + "'");
  }
  std::size_t line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string bases;
    ls >> bases;
    TomographyRecord r;
    r.setting = TomographySetting::parse(bases);
    r.seed = derive_stream_seed(d.seed, r.setting.index());
    r.noise = d.noise;
    std::string token;
    for (auto& c : r.counts) {
      if (!(ls >> token)) throw std::runtime_error("tomography record: line " + std::to_string(line_no) + " has fewer than 16 counts");
      c = detail::parse_u64(token);
      r.total_shots += c;
    }
    if (ls >> token) throw std::runtime_error("tomography record: line " + std::to_string(line_no) + " has extra fields");
    d.records.push_back(r);
  }
  return d;
}

inline TomographyDataset from_text(const std::string& text) {
  std::istringstream is(text);
  return read_dataset(is);
}

// ---------------------------------------------------------------------------
// Reconstruction.

/// Relative outcome frequencies of one setting; weight is the number of
/// shots behind them (1 for exact probabilities).
struct SettingFrequencies {
  TomographySetting setting;
  OutcomeProbabilities frequencies{};
  double weight = 1.0;
};

inline SettingFrequencies frequencies_of(const TomographyRecord& r) {
  SettingFrequencies f{r.setting, {}, 0.0};
  std::uint64_t total = 0;
  for (auto c : r.counts) total += c;
  if (total == 0) throw std::invalid_argument("reconstruct: setting " + r.setting.to_string() + " has no counts");
  for (std::size_t j = 0; j < kOutcomes; ++j) f.frequencies[j] = static_cast<double>(r.counts[j]) / static_cast<double>(total);
  f.weight = static_cast<double>(total);
  return f;
}

/// Pauli string over four qubits, one of I, X, Y, Z (0..3) per qubit; index
/// is base 4 with qubit 0 most significant.
struct PauliString {
  std::array<std::uint8_t, kTomographyQubits> ops{};

  static PauliString from_index(std::size_t index) {
    PauliString s;
    for (std::size_t k = kTomographyQubits; k-- > 0;) {
      s.ops[k] = static_cast<std::uint8_t>(index % 4);
      index /= 4;
    }
    return s;
  }
  std::size_t weight() const {
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](auto o) { return o != 0; }));
  }
  std::string to_string() const {
    std::string out;
    for (auto o : ops) out.push_back("IXYZ"[o]);
    return out;
  }
  /// A setting measures this string when it agrees on every non-identity qubit.
  bool measured_by(const TomographySetting& s) const {
    for (std::size_t k = 0; k < kTomographyQubits; ++k)
      if (ops[k] != 0 && static_cast<int>(s.bases[k]) != ops[k] - 1) return false;
    return true;
  }
  /// Eigenvalue (+1/-1) of the string on a joint outcome of a compatible setting.
  int sign(std::size_t outcome) const {
    int s = 1;
    for (std::size_t k = 0; k < kTomographyQubits; ++k)
      if (ops[k] != 0 && outcome_bit(outcome, k) == 1) s = -s;
    return s;
  }

  ComplexMatrix matrix() const {
    const Complex i{0.0, 1.0};
    const std::array<ComplexMatrix, 4> paulis{ComplexMatrix::identity(2), ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}},
                                              ComplexMatrix{{0.0, -i}, {i, 0.0}}, ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}};
    ComplexMatrix m = paulis[ops[0]];
    for (std::size_t k = 1; k < kTomographyQubits; ++k) m = kron(m, paulis[ops[k]]);
    return m;
  }
};

/// Estimate of one Pauli expectation from a single compatible setting.
inline double pauli_estimate(const PauliString& pauli, const SettingFrequencies& f) {
  double e = 0.0;
  for (std::size_t j = 0; j < kOutcomes; ++j) e += pauli.sign(j) * f.frequencies[j];
  return e;
}

/// Weighted pooled estimates of all 256 Pauli expectations (index 0 is the
/// identity, fixed to 1). Requires every one of the 81 settings.
inline std::array<double, kPauliStrings> pauli_expectations(const std::vector<SettingFrequencies>& data) {
  std::array<bool, kSettings> seen{};
  for (const auto& f : data) seen[f.setting.index()] = true;
  if (data.size() != kSettings || !std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("reconstruct: the 81 Pauli settings are required exactly once each");
  }
  std::array<double, kPauliStrings> expect{};
  expect[0] = 1.0;
  for (std::size_t idx = 1; idx < kPauliStrings; ++idx) {
    const PauliString pauli = PauliString::from_index(idx);
    double sum = 0.0, weight = 0.0;
    for (const auto& f : data) {
      if (!pauli.measured_by(f.setting)) continue;
      sum += f.weight * pauli_estimate(pauli, f);
      weight += f.weight;
    }
    if (!(weight > 0.0)) throw std::logic_error("reconstruct: Pauli string without a compatible setting");
    expect[idx] = sum / weight;
  }
  return expect;
}

/// (1/16) sum_P <P> P, Hermitian with unit trace but possibly not positive.
inline ComplexMatrix linear_inversion(const std::array<double, kPauliStrings>& expect) {
  ComplexMatrix m(kOutcomes, kOutcomes);
  for (std::size_t idx = 0; idx < kPauliStrings; ++idx) {
    if (expect[idx] == 0.0) continue;
    m += PauliString::from_index(idx).matrix() * Complex(expect[idx] / static_cast<double>(kOutcomes));
  }
  return m.hermitian_part();
}

/// Closest density matrix in the spectral sense: negative eigenvalues are
/// zeroed and their weight is spread uniformly over the remaining ones,
/// repeatedly, then the spectrum is renormalized.
inline DensityMatrix project_to_physical(const ComplexMatrix& m, std::vector<std::size_t> dims) {
  EigenDecomposition eig = herm_eig(m);
  auto& lambda = eig.eigenvalues;  // descending
  const double trace = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  if (!(trace > 0.0)) throw std::invalid_argument("project_to_physical: non-positive trace");
  for (double& l : lambda) l /= trace;
  std::size_t kept = lambda.size();
  double accumulated = 0.0;
  while (kept > 0 && lambda[kept - 1] + accumulated / static_cast<double>(kept) < 0.0) {
    accumulated += lambda[kept - 1];
    lambda[kept - 1] = 0.0;
    --kept;
  }
  for (std::size_t i = 0; i < kept; ++i) lambda[i] += accumulated / static_cast<double>(kept);
  const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  for (double& l : lambda) l = std::max(0.0, l) / total;
  return DensityMatrix(eig.reconstruct().hermitian_part(), std::move(dims));
}

namespace detail {

/// Outcome-bit mask of the non-identity qubits of a Pauli string.
inline unsigned support_mask(const PauliString& p) {
  unsigned m = 0;
  for (std::size_t k = 0; k < kTomographyQubits; ++k)
    if (p.ops[k] != 0) m |= 1U << (kTomographyQubits - 1 - k);
  return m;
}

inline int parity_sign(unsigned x) { return (std::popcount(x) & 1U) ? -1 : 1; }

/// The 16 Pauli strings measured by each setting, indexed by support mask.
inline const std::array<std::array<std::size_t, 16>, kSettings>& setting_pauli_table() {
  static const auto table = [] {
    std::array<std::array<std::size_t, 16>, kSettings> t{};
    for (std::size_t s = 0; s < kSettings; ++s) {
      const auto setting = TomographySetting::from_index(s);
      for (unsigned m = 0; m < 16; ++m) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < kTomographyQubits; ++k) {
          const bool on = (m >> (kTomographyQubits - 1 - k)) & 1U;
          idx = 4 * idx + (on ? static_cast<std::size_t>(setting.bases[k]) + 1 : 0);
        }
        t[s][m] = idx;
      }
    }
    return t;
  }();
  return table;
}

/// Nonzero entry of row i of a Pauli string: column i ^ flip with the value.
struct PauliRow {
  std::size_t column;
  Complex value;
};

inline PauliRow pauli_row(const PauliString& p, std::size_t row) {
  std::size_t flip = 0;
  Complex v = 1.0;
  for (std::size_t k = 0; k < kTomographyQubits; ++k) {
    const std::size_t bit = std::size_t{1} << (kTomographyQubits - 1 - k);
    const bool one = row & bit;
    switch (p.ops[k]) {
      case 1: flip |= bit; break;
      case 2: flip |= bit; v *= one ? Complex{0.0, 1.0} : Complex{0.0, -1.0}; break;
      case 3: if (one) v = -v; break;
      default: break;
    }
  }
  return {row ^ flip, v};
}

using PauliRowTable = std::array<std::array<PauliRow, kOutcomes>, kPauliStrings>;

inline const PauliRowTable& pauli_row_table() {
  static const PauliRowTable table = [] {
    PauliRowTable t{};
    for (std::size_t idx = 0; idx < kPauliStrings; ++idx)
      for (std::size_t i = 0; i < kOutcomes; ++i) t[idx][i] = pauli_row(PauliString::from_index(idx), i);
    return t;
  }();
  return table;
}

/// Tr(rho P) for all 256 Pauli strings.
inline std::array<double, kPauliStrings> pauli_expectations_of(const ComplexMatrix& rho) {
  const auto& rows = pauli_row_table();
  std::array<double, kPauliStrings> out{};
  for (std::size_t idx = 0; idx < kPauliStrings; ++idx) {
    double t = 0.0;
    for (std::size_t i = 0; i < kOutcomes; ++i) {
      const auto& [j, v] = rows[idx][i];
      t += (v * rho(j, i)).real();
    }
    out[idx] = t;
  }
  return out;
}

/// (1/16) sum_P c_P P.
inline ComplexMatrix from_pauli_coefficients(const std::array<double, kPauliStrings>& c) {
  const auto& rows = pauli_row_table();
  ComplexMatrix m(kOutcomes, kOutcomes);
  for (std::size_t idx = 0; idx < kPauliStrings; ++idx) {
    if (c[idx] == 0.0) continue;
    const double scale = c[idx] / static_cast<double>(kOutcomes);
    for (std::size_t i = 0; i < kOutcomes; ++i) {
      const auto& [j, v] = rows[idx][i];
      m(i, j) += v * scale;
    }
  }
  return m;
}

}  // namespace detail

enum class ReconstructionMethod {
  linear,            // linear inversion + spectral projection
  maximum_likelihood // the above refined by R rho R iterations
};

struct MaximumLikelihoodOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;  // max entrywise change between iterations
  double start_mixing = 0.01;  // weight of I/16 mixed into the starting point
};

/// Hradil R rho R fixed-point iteration for the multinomial likelihood of
/// the 81 product-basis settings, evaluated in the Pauli basis.
inline DensityMatrix maximum_likelihood_refine(const std::vector<SettingFrequencies>& data, const DensityMatrix& start,
                                               const MaximumLikelihoodOptions& opt = {}) {
  const auto& table = detail::setting_pauli_table();
  double total_weight = 0.0;
  for (const auto& f : data) total_weight += f.weight;
  ComplexMatrix rho = start.matrix() * Complex(1.0 - opt.start_mixing) +
                      ComplexMatrix::identity(kOutcomes) * Complex(opt.start_mixing / static_cast<double>(kOutcomes));
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto expect = detail::pauli_expectations_of(rho);
    std::array<double, kPauliStrings> coeff{};
    for (const auto& f : data) {
      const auto& paulis = table[f.setting.index()];
      const double scale = f.weight / total_weight;
      for (std::size_t j = 0; j < kOutcomes; ++j) {
        if (f.frequencies[j] <= 0.0) continue;
        double prob = 0.0;
        for (unsigned m = 0; m < 16; ++m) prob += detail::parity_sign(m & j) * expect[paulis[m]];
        prob /= static_cast<double>(kOutcomes);
        const double w = scale * f.frequencies[j] / std::max(prob, 1e-300);
        for (unsigned m = 0; m < 16; ++m) coeff[paulis[m]] += w * detail::parity_sign(m & j);
      }
    }
    const ComplexMatrix r = detail::from_pauli_coefficients(coeff);
    ComplexMatrix next = (r * rho * r).hermitian_part();
    next *= Complex(1.0 / next.trace().real());
    const double change = max_abs_diff(next, rho);
    rho = std::move(next);
    if (change < opt.tolerance) break;
  }
  return project_to_physical(rho, start.dims());
}

struct ReconstructionResult {
  DensityMatrix rho_hat;
  double fidelity_to_target;  // NaN when no target was given
  MeasureReport measures;     // I across A|B, E of rho_A
};

inline const std::vector<std::size_t> kFourQubitDims{2, 2, 2, 2};

inline ReconstructionResult reconstruct_from_frequencies(const std::vector<SettingFrequencies>& data,
                                                         const std::optional<DensityMatrix>& target = std::nullopt,
                                                         ReconstructionMethod method = ReconstructionMethod::linear) {
  DensityMatrix rho_hat = project_to_physical(linear_inversion(pauli_expectations(data)), kFourQubitDims);
  if (method == ReconstructionMethod::maximum_likelihood) rho_hat = maximum_likelihood_refine(data, rho_hat);
  const double f = target ? fidelity(rho_hat, *target) : std::numeric_limits<double>::quiet_NaN();
  MeasureReport report = measure_report(rho_hat);
  return {std::move(rho_hat), f, report};
}

inline ReconstructionResult reconstruct(const std::vector<TomographyRecord>& records,
                                        const std::optional<DensityMatrix>& target = std::nullopt,
                                        ReconstructionMethod method = ReconstructionMethod::linear) {
  std::vector<SettingFrequencies> data;
  data.reserve(records.size());
  for (const auto& r : records) {
    if (r.total_shots == 0) throw std::invalid_argument("reconstruct: records need positive shots");
    data.push_back(frequencies_of(r));
  }
  return reconstruct_from_frequencies(data, target, method);
}

/// Exact-probability data for every setting (the infinite-shot limit).
inline std::vector<SettingFrequencies> exact_frequencies(const DensityMatrix& rho) {
  std::vector<SettingFrequencies> data;
  data.reserve(kSettings);
  for (const auto& s : all_settings()) data.push_back({s, born_probabilities(rho, s), 1.0});
  return data;
}

// ---------------------------------------------------------------------------
// Experiment pipeline.

namespace detail {

/// Calls work(i) for i in [0, n) over interleaved chunks.
template <class Work>
void parallel_for(std::size_t n, unsigned threads, Work work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) work(i);
    });
}

}  // namespace detail

/// Samples all 81 settings of rho. Each setting draws from its own stream
/// derive_stream_seed(seed, setting index).
inline TomographyDataset simulate_tomography(const DensityMatrix& rho, std::uint64_t shots, std::uint64_t seed,
                                             CountModel model = CountModel::multinomial, unsigned threads = 1) {
  TomographyDataset d;
  d.shots = shots;
  d.seed = seed;
  d.records.resize(kSettings);
  detail::parallel_for(kSettings, threads, [&](std::size_t i) {
    TomographyRecord& r = d.records[i];
    r.setting = TomographySetting::from_index(i);
    r.seed = derive_stream_seed(seed, i);
    r.counts = sample_counts(born_probabilities(rho, r.setting), shots, r.seed, model);
    r.total_shots = std::accumulate(r.counts.begin(), r.counts.end(), std::uint64_t{0});
  });
  return d;
}

struct ExperimentOptions {
  std::uint64_t shots = 10000;
  std::uint64_t seed = 1;
  NoiseParams noise;
  bool exact = false;  // use Born probabilities as frequencies
  CountModel count_model = CountModel::multinomial;
  // Sampled data only; exact mode always uses linear inversion, which is
  // exact in the infinite-shot limit.
  ReconstructionMethod method = ReconstructionMethod::maximum_likelihood;
  unsigned threads = 1;
};

struct ExperimentRun {
  StateParams params;
  DensityMatrix target;       // noiseless time-bin state
  TomographyDataset dataset;  // empty records in exact mode
  ReconstructionResult result;
};

/// spdc -> dephase -> time-bin mix (p = cos^2 theta) -> noise -> 81 settings
/// -> sampling -> reconstruction. Fidelity is reported against the
/// noiseless target.
inline ExperimentRun run_experiment(double theta, const ExperimentOptions& opt) {
  const StateParams params = StateParams::from_theta(theta);
  DensityMatrix target = experimental_state(theta);
  const DensityMatrix prepared = apply_noise(target, opt.noise);
  TomographyDataset dataset;
  dataset.theta = theta;
  dataset.p = params.p;
  dataset.shots = opt.shots;
  dataset.seed = opt.seed;
  dataset.noise = opt.noise;
  if (opt.exact) {
    auto result = reconstruct_from_frequencies(exact_frequencies(prepared), target);
    return {params, std::move(target), std::move(dataset), std::move(result)};
  }
  TomographyDataset sampled = simulate_tomography(prepared, opt.shots, opt.seed, opt.count_model, opt.threads);
  dataset.records = std::move(sampled.records);
  for (auto& r : dataset.records) r.noise = opt.noise;
  auto result = reconstruct(dataset.records, target, opt.method);
  return {params, std::move(target), std::move(dataset), std::move(result)};
}

struct BootstrapErrors {
  double sigma_I = 0.0;
  double sigma_E = 0.0;
  std::size_t resamples = 0;
};

inline constexpr std::size_t kDefaultBootstrapResamples = 200;

/// Nonparametric bootstrap: every setting is redrawn from its observed
/// frequencies with its own shot total, the state is reconstructed, and the
/// sample standard deviations of I and E are returned. Resample r of setting
/// s uses stream derive_stream_seed(seed, s, r + 1).
inline BootstrapErrors bootstrap_errors(const std::vector<TomographyRecord>& records, std::size_t resamples,
                                        std::uint64_t seed,
                                        ReconstructionMethod method = ReconstructionMethod::maximum_likelihood,
                                        unsigned threads = 1) {
  if (resamples < 2) throw std::invalid_argument("bootstrap_errors: need at least two resamples");
  std::vector<SettingFrequencies> observed;
  observed.reserve(records.size());
  for (const auto& r : records) observed.push_back(frequencies_of(r));
  std::vector<double> is(resamples), es(resamples);
  detail::parallel_for(resamples, threads, [&](std::size_t b) {
    std::vector<SettingFrequencies> draw = observed;
    for (auto& f : draw) {
      const auto shots = static_cast<std::uint64_t>(f.weight);
      const auto counts = sample_counts(f.frequencies, shots, derive_stream_seed(seed, f.setting.index(), b + 1));
      for (std::size_t j = 0; j < kOutcomes; ++j) f.frequencies[j] = static_cast<double>(counts[j]) / f.weight;
    }
    const auto res = reconstruct_from_frequencies(draw, std::nullopt, method);
    is[b] = res.measures.mutual_information;
    es[b] = res.measures.concurrence;
  });
  auto stddev = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  return {stddev(is), stddev(es), resamples};
}

}  // namespace qtradeoff
