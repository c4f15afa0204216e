// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spin_orbit_model.hpp
 * @brief The coupled two-spin Hamiltonian and its pointwise band structure.
 *
 * Ĥ = (1−λ) 1⊗S3 + λ (2/d_j) J·S acts on H_j ⊗ H_s with the slow spin J as
 * the outer (row-major block) factor. Its principal symbol
 * H0(n) = (1−λ)S3 + λ n·S = N(n,λ) n_λ·S has eigenvalues N·m.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphere_sapt/sphere_calculus.hpp"
#include "sphere_sapt/spin_algebra.hpp"
#include "sphere_sapt/star_product.hpp"
#include "sphere_sapt/sw_quant.hpp"

namespace sphere_sapt {

/// Model parameters; d_j = two_j + 1 must exceed d_s = two_s + 1.
struct ModelParams {
  int two_j = 10;
  int two_s = 1;
  double lambda = 0.2;

  int dim_j() const { return two_j + 1; }
  int dim_s() const { return two_s + 1; }

  void validate() const {
    if (two_s < 0 || two_j <= two_s)
      throw std::invalid_argument("model needs two_j > two_s >= 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  }
};

/// Shared immutable irreps.
inline std::shared_ptr<const SpinIrrep> cached_irrep(int two_j) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const SpinIrrep>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[two_j];
  if (!slot) slot = std::make_shared<const SpinIrrep>(two_j);
  return slot;
}

/// Kronecker product a ⊗ b with a as the outer factor.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// The Hamiltonian matrix of dimension d_j·d_s.
inline Matrix build_hamiltonian(const ModelParams& p) {
  p.validate();
  const auto j = cached_irrep(p.two_j);
  const auto s = cached_irrep(p.two_s);
  const Matrix id = Matrix::Identity(p.dim_j(), p.dim_j());
  Matrix h = (1.0 - p.lambda) * kron(id, s->J3());
  for (int a = 0; a < 3; ++a) h += (p.lambda * 2.0 / p.dim_j()) * kron(j->J(a), s->J(a));
  return h;
}

// ============================================================================
// Symbols
// ============================================================================

/// The matrix-valued symbol n·S.
inline SphereSymbol spin_projection_symbol(int two_s) {
  const auto s = cached_irrep(two_s);
  SphereSymbol out(1, two_s + 1);
  for (int a = 0; a < 3; ++a) out += scalar_times(SphereSymbol::coordinate(a), s->J(a));
  return out;
}

/// The constant symbol S3.
inline SphereSymbol spin_component_symbol(int two_s) {
  return SphereSymbol::constant(Matrix(cached_irrep(two_s)->J3()));
}

/// Coefficient of d^-2k in the expansion of sqrt(1 − d^-2).
inline double sqrt_series_coefficient(int k) {
  if (k == 0) return 1.0;
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom *= static_cast<double>(k + i) / i;
  return binom / ((1.0 - 2.0 * k) * std::pow(4.0, k));
}

/**
 * @brief Semiclassical symbol [H0, H1, ..., H_order] of the Hamiltonian.
 *
 * H0 = (1−λ)S3 + λ n·S, odd terms vanish and H_2k = λ c_k n·S, where c_k are
 * the coefficients of sqrt(1 − x²). The series sums to the exact symbol.
 */
inline SemiclassicalSymbol hamiltonian_symbol(const ModelParams& p, int order = 2) {
  p.validate();
  if (order < 0) throw std::invalid_argument("order must be nonnegative");
  const SphereSymbol ns = spin_projection_symbol(p.two_s);
  std::vector<SphereSymbol> terms;
  for (int i = 0; i <= order; ++i) {
    SphereSymbol t(1, p.dim_s());
    if (i == 0) t += (1.0 - p.lambda) * spin_component_symbol(p.two_s);
    if (i % 2 == 0) t += (p.lambda * sqrt_series_coefficient(i / 2)) * ns;
    terms.push_back(t);
  }
  return SemiclassicalSymbol(std::move(terms));
}

/// The exact symbol (1−λ)S3 + λ sqrt(1 − d_j^-2) n·S.
inline SphereSymbol hamiltonian_symbol_exact(const ModelParams& p) {
  p.validate();
  const double d = p.dim_j();
  return (1.0 - p.lambda) * spin_component_symbol(p.two_s) +
         (p.lambda * std::sqrt(1.0 - 1.0 / (d * d))) * spin_projection_symbol(p.two_s);
}

/// The lower symbol (1−λ)S3 + λ(1 − d_j^-1) n·S.
inline SphereSymbol hamiltonian_lower_symbol(const ModelParams& p) {
  p.validate();
  const double d = p.dim_j();
  return (1.0 - p.lambda) * spin_component_symbol(p.two_s) +
         (p.lambda * (1.0 - 1.0 / d)) * spin_projection_symbol(p.two_s);
}

// ============================================================================
// Principal bands
// ============================================================================

/// N(θ, λ) = |(1−λ)e3 + λn|.
inline double band_gap(double theta, double lambda) {
  return std::hypot(1.0 - lambda + lambda * std::cos(theta), lambda * std::sin(theta));
}

/// Polar angle of n_λ.
inline double rotated_polar_angle(double theta, double lambda) {
  return std::atan2(lambda * std::sin(theta), 1.0 - lambda + lambda * std::cos(theta));
}

/// dθ_λ/dθ = λ(λ + (1−λ)cosθ)/N².
inline double rotated_polar_derivative(double theta, double lambda) {
  const double n = band_gap(theta, lambda);
  return lambda * (lambda + (1.0 - lambda) * std::cos(theta)) / (n * n);
}

/// Band label m = s − a of the a-th band (a = 0 is the top band).
inline double band_label(int two_s, int a) { return 0.5 * two_s - a; }

/// Index a of the band with label 2m = two_m.
inline int band_index(int two_s, int two_m) {
  if (std::abs(two_m) > two_s || (two_s - two_m) % 2 != 0)
    throw std::invalid_argument("invalid band label 2m = " + std::to_string(two_m));
  return (two_s - two_m) / 2;
}

/// Pointwise band data at one point of the sphere.
struct BandSlice {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  double gap = 0.0;                 ///< N(n, λ)
  std::vector<double> energies;     ///< E_m = N m, ordered by a = s − m
  Matrix frame;                     ///< column a is ψ_m
  std::vector<Matrix> projectors;   ///< π_m
  Matrix u0;                        ///< u0 H0 u0† = N S3
  bool degenerate = false;          ///< N below 1e-12
  bool gauge_singular = false;      ///< λ > ½ at θ = π: frame depends on the chart
};

/// The reference unitary e^{−iφS3} e^{iθ_λ S2} e^{iφS3}.
inline Matrix reference_unitary(double theta, double phi, double lambda, int two_s) {
  return wigner_zyz(*cached_irrep(two_s), phi, rotated_polar_angle(theta, lambda), phi);
}

inline BandSlice principal_bands(double theta, double phi, double lambda, int two_s) {
  BandSlice b;
  b.theta = theta;
  b.phi = phi;
  b.lambda = lambda;
  b.gap = band_gap(theta, lambda);
  b.degenerate = b.gap < 1e-12;
  b.gauge_singular = lambda > 0.5 && std::abs(theta - kPi) < 1e-12;
  const int ds = two_s + 1;
  b.u0 = reference_unitary(theta, phi, lambda, two_s);
  b.frame = b.u0.adjoint();
  for (int a = 0; a < ds; ++a) {
    b.energies.push_back(b.gap * band_label(two_s, a));
    b.projectors.push_back(b.frame.col(a) * b.frame.col(a).adjoint());
  }
  return b;
}

inline BandSlice principal_bands(const Vec3& n, double lambda, int two_s) {
  return principal_bands(std::acos(std::clamp(n(2), -1.0, 1.0)), std::atan2(n(1), n(0)), lambda,
                         two_s);
}

/// The principal symbol H0 at a point.
inline Matrix principal_symbol(double theta, double phi, double lambda, int two_s) {
  const auto s = cached_irrep(two_s);
  const Vec3 n = unit_vector(theta, phi);
  return (1.0 - lambda) * s->J3() + lambda * s->dot(n);
}

/// N(θ, λ) on a uniform θ grid and its minimum.
struct GapProfile {
  double lambda = 0.0;
  std::vector<double> thetas;
  std::vector<double> gaps;
  double min_gap = 0.0;
  double argmin = 0.0;
};

/**
 * @brief Adjacent-band separation N(θ, λ) at θ = iπ/n_theta, i = 0..n_theta.
 *
 * Adjacent bands E_m and E_{m−1} differ by N for every spin s ≥ ½.
 */
inline GapProfile gap_profile(double lambda, int two_s, int n_theta) {
  if (two_s < 1) throw std::invalid_argument("a gap needs at least two bands");
  if (n_theta < 1) throw std::invalid_argument("gap profile needs at least one interval");
  GapProfile g;
  g.lambda = lambda;
  g.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_theta; ++i) {
    const double t = i == n_theta ? kPi : kPi * i / n_theta;
    const double n = band_gap(t, lambda);
    g.thetas.push_back(t);
    g.gaps.push_back(n);
    if (n < g.min_gap) {
      g.min_gap = n;
      g.argmin = t;
    }
  }
  return g;
}

}  // namespace sphere_sapt
