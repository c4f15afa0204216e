// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spin_algebra.hpp
 * @brief Finite-dimensional su(2) representation theory.
 *
 * Spin matrices in the basis |j m>, m = j, j-1, ..., -j (row index a holds
 * m = j - a), exact Clebsch-Gordan coefficients, trace-orthonormal tensor
 * operators T_lm, ZYZ rotations and spin coherent states.
 *
 * Tensor operators are real and live on a single diagonal: T_lm has nonzero
 * entries only at (a, b) with m_a = m_b + m. Entries are generated per
 * m-sector as orthonormal polynomials in J3 against the weights of (J+)^m and
 * phase-fixed with the Condon-Shortley lowering relation
 *   [J-, T_lm] = sqrt(l(l+1) - m(m-1)) T_{l,m-1},   T_ll ∝ (-1)^l (J+)^l.
 * This stays orthonormal to machine precision up to two_j ~ 100.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sphere_sapt/types.hpp"

namespace sphere_sapt {

// ============================================================================
// Spin irreps
// ============================================================================

/// Irreducible su(2) representation of dimension d = two_j + 1.
class SpinIrrep {
 public:
  SpinIrrep() : SpinIrrep(0) {}

  explicit SpinIrrep(int two_j) : two_j_(two_j) {
    if (two_j < 0) throw std::invalid_argument("two_j must be nonnegative");
    const int d = two_j + 1;
    const double j = 0.5 * two_j;
    Matrix jp = Matrix::Zero(d, d);
    for (int a = 1; a < d; ++a) {
      const double m = j - a;
      jp(a - 1, a) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const Matrix jm = jp.adjoint();
    j1_ = 0.5 * (jp + jm);
    j2_ = (jp - jm) / cplx(0.0, 2.0);
    j3_ = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) j3_(a, a) = j - a;
    jp_ = jp;
    jm_ = jm;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(j2_);
    j2_vectors_ = eig.eigenvectors();
    j2_values_ = eig.eigenvalues();
  }

  int two_j() const { return two_j_; }
  int dim() const { return two_j_ + 1; }
  double j() const { return 0.5 * two_j_; }
  double casimir() const { return j() * (j() + 1.0); }

  /// Magnetic quantum number of basis index a.
  double weight(int a) const { return j() - a; }

  const Matrix& J1() const { return j1_; }
  const Matrix& J2() const { return j2_; }
  const Matrix& J3() const { return j3_; }
  const Matrix& J_plus() const { return jp_; }
  const Matrix& J_minus() const { return jm_; }

  /// Component a = 0, 1, 2 of the spin vector.
  const Matrix& J(int a) const {
    switch (a) {
      case 0: return j1_;
      case 1: return j2_;
      case 2: return j3_;
      default: throw std::out_of_range("spin component index must be 0, 1 or 2");
    }
  }

  /// n·J for a 3-vector n.
  Matrix dot(const Vec3& n) const { return n(0) * j1_ + n(1) * j2_ + n(2) * j3_; }

  /// exp(i beta J2) from the stored eigendecomposition of J2.
  Matrix exp_i_J2(double beta) const {
    Vector phases(dim());
    for (int k = 0; k < dim(); ++k) phases(k) = std::exp(kI * (beta * j2_values_(k)));
    return j2_vectors_ * phases.asDiagonal() * j2_vectors_.adjoint();
  }

 private:
  int two_j_;
  Matrix j1_, j2_, j3_, jp_, jm_;
  Matrix j2_vectors_;
  RealVector j2_values_;
};

/// Builds the spin-j irrep for j = two_j / 2.
inline SpinIrrep make_irrep(int two_j) { return SpinIrrep(two_j); }

/// Largest residual of [J_a, J_b] = i ε_abc J_c over all index pairs.
inline double commutator_residual(const SpinIrrep& irrep) {
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const Matrix r = irrep.J(a) * irrep.J(b) - irrep.J(b) * irrep.J(a) - kI * irrep.J(c);
    worst = std::max(worst, max_abs(r));
  }
  return worst;
}

/// Largest residual of J·J = j(j+1).
inline double casimir_residual(const SpinIrrep& irrep) {
  const Matrix c = irrep.J1() * irrep.J1() + irrep.J2() * irrep.J2() + irrep.J3() * irrep.J3();
  return max_abs(c - irrep.casimir() * Matrix::Identity(irrep.dim(), irrep.dim()));
}

// ============================================================================
// Clebsch-Gordan coefficients
// ============================================================================

namespace detail {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline const BigInt& factorial(int n) {
  static std::mutex mutex;
  static std::deque<BigInt> table{BigInt(1)};
  std::lock_guard<std::mutex> lock(mutex);
  while (static_cast<int>(table.size()) <= n) {
    table.push_back(table.back() * static_cast<long>(table.size()));
  }
  return table[static_cast<std::size_t>(n)];
}

/// (a + b + ...) / 2 for doubled arguments; -1 when the sum is odd.
inline int halve(int twice) { return (twice % 2 == 0) ? twice / 2 : -1; }

}  // namespace detail

/**
 * @brief Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley).
 *
 * All arguments are doubled (two_j1 = 2 j1 etc.). The Racah sum is evaluated
 * in exact rational arithmetic; only the final square root is taken in
 * floating point. Invalid combinations return 0.
 */
inline double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J,
                             int two_M) {
  using detail::BigInt;
  using detail::Rational;
  using detail::factorial;
  using detail::halve;

  if (two_j1 < 0 || two_j2 < 0 || two_J < 0) return 0.0;
  if (two_M != two_m1 + two_m2) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J)
    return 0.0;
  if ((two_j1 + two_m1) % 2 || (two_j2 + two_m2) % 2 || (two_J + two_M) % 2) return 0.0;

  const int a = halve(two_J + two_j1 - two_j2);
  const int b = halve(two_J - two_j1 + two_j2);
  const int c = halve(two_j1 + two_j2 - two_J);
  const int s = halve(two_j1 + two_j2 + two_J);
  if (a < 0 || b < 0 || c < 0 || s < 0) return 0.0;

  const int jpm = halve(two_J + two_M), jmm = halve(two_J - two_M);
  const int j1m = halve(two_j1 - two_m1), j1p = halve(two_j1 + two_m1);
  const int j2m = halve(two_j2 - two_m2), j2p = halve(two_j2 + two_m2);

  Rational prefactor(BigInt(two_J + 1) * factorial(a) * factorial(b) * factorial(c),
                     factorial(s + 1));
  prefactor *= Rational(factorial(jpm) * factorial(jmm) * factorial(j1m) * factorial(j1p) *
                        factorial(j2m) * factorial(j2p));

  const int t1 = halve(two_J - two_j2 + two_m1);  // J - j2 + m1
  const int t2 = halve(two_J - two_j1 - two_m2);  // J - j1 - m2
  const int k_min = std::max({0, -t1, -t2});
  const int k_max = std::min({c, j1m, j2p});
  Rational sum(0);
  for (int k = k_min; k <= k_max; ++k) {
    BigInt den = factorial(k) * factorial(c - k) * factorial(j1m - k) * factorial(j2p - k) *
                 factorial(t1 + k) * factorial(t2 + k);
    Rational term(BigInt(1), den);
    if (k % 2) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;
  const Rational squared = prefactor * sum * sum;
  const double magnitude = std::sqrt(squared.convert_to<double>());
  return sum > 0 ? magnitude : -magnitude;
}

// ============================================================================
// Tensor operators
// ============================================================================

/// A single tensor operator with its labels and dense matrix.
struct TensorOperator {
  int l = 0;
  int m = 0;
  Matrix matrix;
};

/**
 * @brief Complete set of tensor operators {T_lm : l <= 2j} for one irrep.
 *
 * Only the nonzero diagonal of each operator is stored. For m >= 0 entry k
 * sits at (k, k + m); negative m follow from T_{l,-m} = (-1)^m T_lm^T, which
 * is the conjugation rule T_lm^† = (-1)^m T_{l,-m} for real T.
 */
class TensorBasis {
 public:
  explicit TensorBasis(int two_j) : two_j_(two_j), d_(two_j + 1) {
    if (two_j < 0) throw std::invalid_argument("two_j must be nonnegative");
    diagonals_.resize(static_cast<std::size_t>(d_ * d_));
    for (int m = 0; m <= two_j_; ++m) build_sector(m);
    fix_phases();
  }

  int two_j() const { return two_j_; }
  int dim() const { return d_; }

  /// Number of nonzero entries of T_lm.
  int length(int m) const { return d_ - std::abs(m); }

  /// Entry k of the nonzero diagonal of T_lm.
  double entry(int l, int m, int k) const {
    const double v = positive(l, std::abs(m))(k);
    return (m < 0 && (std::abs(m) % 2)) ? -v : v;
  }

  /// Row of entry k of T_lm.
  int row(int m, int k) const { return m >= 0 ? k : k - m; }
  /// Column of entry k of T_lm.
  int col(int m, int k) const { return m >= 0 ? k + m : k; }

  /// Dense matrix of T_lm.
  Matrix matrix(int l, int m) const {
    check(l, m);
    Matrix t = Matrix::Zero(d_, d_);
    for (int k = 0; k < length(m); ++k) t(row(m, k), col(m, k)) = entry(l, m, k);
    return t;
  }

  /// tr(T_lm^† A).
  cplx inner(int l, int m, const Matrix& a) const {
    cplx acc = 0.0;
    for (int k = 0; k < length(m); ++k) acc += entry(l, m, k) * a(row(m, k), col(m, k));
    return acc;
  }

  /// A += c T_lm.
  void accumulate(int l, int m, cplx c, Matrix& a) const {
    for (int k = 0; k < length(m); ++k) a(row(m, k), col(m, k)) += c * entry(l, m, k);
  }

  void check(int l, int m) const {
    if (l < 0 || l > two_j_ || std::abs(m) > l)
      throw std::out_of_range("tensor operator labels out of range: l=" + std::to_string(l) +
                              " m=" + std::to_string(m));
  }

 private:
  const RealVector& positive(int l, int m) const {
    return diagonals_[static_cast<std::size_t>(l * d_ + m)];
  }
  RealVector& positive(int l, int m) { return diagonals_[static_cast<std::size_t>(l * d_ + m)]; }

  double j() const { return 0.5 * two_j_; }
  double weight(int a) const { return j() - a; }

  // Lanczos on diag(m_b) with start vector given by the (J+)^m entries.
  void build_sector(int m) {
    const int n = d_ - m;
    RealVector x(n), logw(n);
    for (int k = 0; k < n; ++k) {
      const double mb = weight(k + m);
      x(k) = mb;
      double acc = 0.0;
      for (int t = 0; t < m; ++t) {
        const double mu = mb + t;
        acc += 0.5 * std::log(j() * (j() + 1.0) - mu * (mu + 1.0));
      }
      logw(k) = acc;
    }
    const double shift = logw.maxCoeff();
    RealVector q = (logw.array() - shift).exp().matrix();
    q /= q.norm();

    std::vector<RealVector> basis;
    basis.reserve(static_cast<std::size_t>(n));
    basis.push_back(q);
    for (int i = 1; i < n; ++i) {
      RealVector v = x.cwiseProduct(basis.back());
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
      v /= v.norm();
      basis.push_back(v);
    }
    for (int i = 0; i < n; ++i) positive(m + i, m) = basis[static_cast<std::size_t>(i)];
  }

  // <T_{l,m-1}, [J-, T_lm]> for m >= 1 using only stored diagonals.
  double lowering_overlap(int l, int m) const {
    const RealVector& upper = positive(l, m);
    const RealVector& lower = positive(l, m - 1);
    auto jm = [this](int a) {
      const double ma = weight(a);
      return std::sqrt(j() * (j() + 1.0) - ma * (ma - 1.0));
    };
    const int n_upper = d_ - m;
    double acc = 0.0;
    for (int r = 0; r <= n_upper; ++r) {
      double v = 0.0;
      if (r >= 1) v += jm(r - 1) * upper(r - 1);
      if (r < n_upper) v -= upper(r) * jm(r + m - 1);
      acc += lower(r) * v;
    }
    return acc;
  }

  void fix_phases() {
    for (int l = 0; l <= two_j_; ++l) {
      if (l % 2) positive(l, l) = -positive(l, l);
      for (int m = l; m >= 1; --m)
        if (lowering_overlap(l, m) < 0.0) positive(l, m - 1) = -positive(l, m - 1);
    }
  }

  int two_j_;
  int d_;
  std::vector<RealVector> diagonals_;
};

/// Process-wide cache of tensor bases keyed by two_j.
inline std::shared_ptr<const TensorBasis> tensor_basis(int two_j) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const TensorBasis>> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(two_j);
    if (it != cache.end()) return it->second;
  }
  auto basis = std::make_shared<const TensorBasis>(two_j);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(two_j, basis).first->second;
}

/// Tensor operator T_lm of the given irrep.
inline TensorOperator tensor_operator(const SpinIrrep& irrep, int l, int m) {
  auto basis = tensor_basis(irrep.two_j());
  basis->check(l, m);
  return TensorOperator{l, m, basis->matrix(l, m)};
}

// ============================================================================
// Rotations and coherent states
// ============================================================================

/// exp(-i alpha J3) exp(i beta J2) exp(i gamma J3).
inline Matrix wigner_zyz(const SpinIrrep& irrep, double alpha, double beta, double gamma) {
  const int d = irrep.dim();
  Vector left(d), right(d);
  for (int a = 0; a < d; ++a) {
    left(a) = std::exp(-kI * (alpha * irrep.weight(a)));
    right(a) = std::exp(kI * (gamma * irrep.weight(a)));
  }
  return left.asDiagonal() * irrep.exp_i_J2(beta) * right.asDiagonal();
}

/// SO(3) image of a unitary: U J_b U^† = Σ_a R_ab J_a.
inline Mat3 adjoint_rotation(const SpinIrrep& irrep, const Matrix& u) {
  Mat3 r;
  const double norm = irrep.casimir() * irrep.dim() / 3.0;
  for (int b = 0; b < 3; ++b) {
    const Matrix rotated = u * irrep.J(b) * u.adjoint();
    for (int a = 0; a < 3; ++a) r(a, b) = (irrep.J(a) * rotated).trace().real() / norm;
  }
  return r;
}

/// Spin coherent state exp(-i phi J3) exp(-i theta J2) |j j>.
inline Vector coherent_state(const SpinIrrep& irrep, const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("coherent_state requires a unit vector");
  const double theta = std::acos(std::clamp(n(2), -1.0, 1.0));
  const double phi = std::atan2(n(1), n(0));
  return wigner_zyz(irrep, phi, -theta, 0.0).col(0);
}

}  // namespace sphere_sapt
