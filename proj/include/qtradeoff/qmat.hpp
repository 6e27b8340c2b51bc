// qmat.hpp
// Dense complex linear algebra for small Hilbert spaces (dimension <= 64):
// Kronecker products, partial traces, a cyclic Jacobi Hermitian
// eigensolver and spectral matrix functions.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qtradeoff {

using Complex = std::complex<double>;
using Ket = std::vector<Complex>;

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kNegativeEigenTolerance = 1e-9;
inline constexpr double kEigInputHermitianTolerance = 1e-8;

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
    }
    if (!is_finite()) {
      throw std::invalid_argument("ComplexMatrix: non-finite entry");
    }
  }
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw std::invalid_argument("ComplexMatrix: ragged initializer");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }
  static ComplexMatrix diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
  }

  /// |v><v|
  static ComplexMatrix projector(const Ket& v) {
    ComplexMatrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
  }

  /// Column matrix built from a list of kets.
  static ComplexMatrix from_columns(std::span<const Ket> columns) {
    if (columns.empty()) return {};
    ComplexMatrix m(columns.front().size(), columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].size() != m.rows()) {
        throw std::invalid_argument("from_columns: inconsistent column length");
      }
      for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = columns[c][r];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  std::span<const Complex> entries() const noexcept { return data_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool is_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
    return m;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix m = *this;
    for (auto& z : m.data_) z = std::conj(z);
    return m;
  }

  Complex trace() const {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  Ket column(std::size_t c) const {
    Ket v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
  }

  /// Largest entrywise |M - M^dagger|.
  double hermiticity_defect() const {
    if (!is_square()) return INFINITY;
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = r; c < cols_; ++c)
        worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return worst;
  }

  /// (M + M^dagger) / 2
  ComplexMatrix hermitian_part() const {
    ComplexMatrix m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        m(r, c) = 0.5 * ((*this)(r, c) + std::conj((*this)(c, r)));
    return m;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: shape mismatch");
    ComplexMatrix m(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
      }
    return m;
  }

  friend Ket operator*(const ComplexMatrix& a, const Ket& v) {
    if (a.cols_ != v.size()) throw std::invalid_argument("matrix-vector product: shape mismatch");
    Ket out(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) out[i] += a(i, k) * v[k];
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument("matrix sum: shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Max entrywise |a - b|.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
  return worst;
}

inline double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

inline Complex inner_product(const Ket& a, const Ket& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner_product: length mismatch");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.is_finite() || !b.is_finite()) throw std::invalid_argument("kron: non-finite input");
  ComplexMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const Complex s = a(ia, ja);
      for (std::size_t ib = 0; ib < b.rows(); ++ib)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          m(ia * b.rows() + ib, ja * b.cols() + jb) = s * b(ib, jb);
    }
  return m;
}

inline Ket kron(const Ket& a, const Ket& b) {
  Ket v(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) v[i * b.size() + j] = a[i] * b[j];
  return v;
}

/// Density operator with attached tensor-factor dimensions.
/// Construction validates Hermiticity, unit trace, positivity and dims.
class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix matrix, std::vector<std::size_t> dims);

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dimension() const noexcept { return matrix_.rows(); }
  Complex operator()(std::size_t r, std::size_t c) const { return matrix_(r, c); }

  /// Same operator, different factorization (e.g. [2,2,4] <-> [2,2,2,2]).
  DensityMatrix with_dims(std::vector<std::size_t> dims) const {
    return DensityMatrix(matrix_, std::move(dims));
  }

 private:
  ComplexMatrix matrix_;
  std::vector<std::size_t> dims_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns

  ComplexMatrix reconstruct() const {
    ComplexMatrix scaled = eigenvectors;
    for (std::size_t r = 0; r < scaled.rows(); ++r)
      for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= eigenvalues[c];
    return scaled * eigenvectors.adjoint();
  }
};

namespace detail {

// Zeroes the (p,q) element of the Hermitian matrix a with a complex Jacobi
// rotation G = D R, D = diag(1, e^{-i phi}) and R the real rotation, and
// accumulates G into v.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const Complex apq = a(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const Complex phase = apq / g;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * g);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Complex gpp = c;
  const Complex gpq = s;
  const Complex gqp = -s * std::conj(phase);
  const Complex gqq = c * std::conj(phase);

  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {  // a <- a G
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * gpp + akq * gqp;
    a(k, q) = akp * gpq + akq * gqq;
  }
  for (std::size_t k = 0; k < n; ++k) {  // a <- G^dagger a
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();
  for (std::size_t k = 0; k < n; ++k) {  // v <- v G
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = vkp * gpp + vkq * gqp;
    v(k, q) = vkp * gpq + vkq * gqq;
  }
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      if (r != c) s += std::norm(a(r, c));
  return std::sqrt(s);
}

}  // namespace detail

inline constexpr double kJacobiOffDiagonalTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

/// Hermitian eigendecomposition by cyclic Jacobi sweeps. Eigenvalues are
/// returned in descending order; each eigenvector is phase-fixed so its first
/// non-negligible component is real and positive.
inline EigenDecomposition herm_eig(const ComplexMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("herm_eig: matrix is not square");
  if (!m.is_finite()) throw std::invalid_argument("herm_eig: non-finite input");
  if (m.hermiticity_defect() > kEigInputHermitianTolerance) {
    throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = m.hermitian_part();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = std::max(1.0, frobenius_norm(a));
  bool converged = n <= 1;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    if (detail::off_diagonal_norm(a) < kJacobiOffDiagonalTolerance * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
  }
  if (!converged && detail::off_diagonal_norm(a) >= kJacobiOffDiagonalTolerance * scale) {
    throw std::runtime_error("herm_eig: Jacobi iteration did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() > a(j, j).real();
  });

  EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.eigenvalues[c] = a(src, src).real();
    Complex phase = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > 1e-12) {
        phase = std::conj(v(r, src)) / std::abs(v(r, src));
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v(r, src) * phase;
  }
  return out;
}

inline std::vector<double> eigenvalues(const ComplexMatrix& m) { return herm_eig(m).eigenvalues; }

/// V f(L) V^dagger. Eigenvalues in [-1e-9, 0) are clamped to 0 before f is
/// applied; a non-finite f value is a domain error.
inline ComplexMatrix spectral_fn(const ComplexMatrix& m, const std::function<double(double)>& f) {
  EigenDecomposition eig = herm_eig(m);
  for (double& lambda : eig.eigenvalues) {
    if (lambda < 0.0 && lambda >= -kNegativeEigenTolerance) lambda = 0.0;
    const double y = f(lambda);
    if (!std::isfinite(y)) {
      throw std::domain_error("spectral_fn: function undefined at eigenvalue " + std::to_string(lambda));
    }
    lambda = y;
  }
  return eig.reconstruct();
}

/// Relative size below which an eigenvalue of a positive semidefinite matrix
/// is indistinguishable from rounding error in the eigensolver.
inline constexpr double kSpectralNoiseFloor = 1e-14;

/// Square root of a positive semidefinite matrix. Eigenvalues below
/// kSpectralNoiseFloor times the largest are treated as zero, so rounding
/// noise in a null space does not turn into O(1e-8) square roots.
inline ComplexMatrix matrix_sqrt(const ComplexMatrix& m) {
  EigenDecomposition eig = herm_eig(m);
  const double floor = kSpectralNoiseFloor * std::max(1.0, std::abs(eig.eigenvalues.front()));
  for (double& lambda : eig.eigenvalues) {
    if (lambda < -kNegativeEigenTolerance) {
      throw std::domain_error("matrix_sqrt: negative eigenvalue " + std::to_string(lambda));
    }
    lambda = lambda <= floor ? 0.0 : std::sqrt(lambda);
  }
  return eig.reconstruct();
}

inline DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<std::size_t> dims)
    : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  if (!matrix_.is_square() || matrix_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
  }
  if (!matrix_.is_finite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  const std::size_t product =
      std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
  if (dims_.empty() || product != matrix_.rows()) {
    throw std::invalid_argument("DensityMatrix: product of dims does not match matrix dimension");
  }
  if (matrix_.hermiticity_defect() > kHermitianTolerance) {
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  }
  if (std::abs(matrix_.trace() - 1.0) > kTraceTolerance) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1");
  }
  matrix_ = matrix_.hermitian_part();
  const auto spectrum = eigenvalues(matrix_);
  if (spectrum.back() < -kNegativeEigenTolerance) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(spectrum.back()));
  }
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<std::size_t> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(kron(a.matrix(), b.matrix()), std::move(dims));
}

/// Partial trace of a square operator over every factor not listed in keep.
/// Kept factors stay in their original order.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                   std::span<const std::size_t> keep) {
  const std::size_t nf = dims.size();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<bool> kept(nf, false);
  for (std::size_t k : keep) {
    if (k >= nf) throw std::invalid_argument("partial_trace: subsystem index out of range");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
  if (!m.is_square() || m.rows() != total) {
    throw std::invalid_argument("partial_trace: dims do not match matrix");
  }

  std::vector<std::size_t> stride(nf, 1);
  for (std::size_t f = nf; f-- > 1;) stride[f - 1] = stride[f] * dims[f];

  std::size_t kept_dim = 1;
  std::size_t traced_dim = 1;
  std::vector<std::size_t> kept_factors;
  std::vector<std::size_t> traced_factors;
  for (std::size_t f = 0; f < nf; ++f) {
    if (kept[f]) {
      kept_dim *= dims[f];
      kept_factors.push_back(f);
    } else {
      traced_dim *= dims[f];
      traced_factors.push_back(f);
    }
  }

  // Offset in the full index contributed by a multi-index over a factor group.
  auto offsets = [&](const std::vector<std::size_t>& factors, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx;
      std::size_t off = 0;
      for (std::size_t g = factors.size(); g-- > 0;) {
        const std::size_t f = factors[g];
        off += (rem % dims[f]) * stride[f];
        rem /= dims[f];
      }
      out[idx] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept_factors, kept_dim);
  const auto traced_off = offsets(traced_factors, traced_dim);

  ComplexMatrix out(kept_dim, kept_dim);
  for (std::size_t r = 0; r < kept_dim; ++r)
    for (std::size_t c = 0; c < kept_dim; ++c) {
      Complex s{};
      for (std::size_t t = 0; t < traced_dim; ++t) s += m(kept_off[r] + traced_off[t], kept_off[c] + traced_off[t]);
      out(r, c) = s;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  std::vector<std::size_t> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  ComplexMatrix reduced = partial_trace(rho.matrix(), rho.dims(), sorted);
  std::vector<std::size_t> dims;
  for (std::size_t k : sorted) dims.push_back(rho.dims()[k]);
  return DensityMatrix(std::move(reduced), std::move(dims));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

}  // namespace qtradeoff
