// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file sw_quant.hpp
 * @brief Stratonovich-Weyl kernel, quantization, dequantization and
 *        spin-coherent lower symbols.
 *
 * The kernel is Δ(n) = sqrt(4π/d) Σ_{l<=2j} conj(Y_lm(n)) T_lm, so that
 *   quantize(f)     = (d/4π) ∫ f(n) Δ(n) d²n = sqrt(d/4π) Σ f_lm T_lm,
 *   dequantize(A)   = tr(Δ(n) A),            coefficients sqrt(4π/d) tr(T_lm^† A).
 * Both maps are evaluated in coefficient space; grid samples of Δ are only
 * materialized when the kernel properties are to be checked.
 *
 * Matrix-valued symbols of block size k act on H_j ⊗ C^k with slow-major
 * ordering: operator index a·k + r pairs slow index a with fast index r.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sphere_sapt/sphere_calculus.hpp"
#include "sphere_sapt/spin_algebra.hpp"

namespace sphere_sapt {

/// Residuals of the five kernel properties.
struct KernelAxioms {
  double hermiticity = 0.0;        ///< (a) Δ(n)^† = Δ(n)
  double resolution = 0.0;         ///< (b) (d/4π) ∫ Δ = 1
  double reproducing = 0.0;        ///< (c) (d/4π) ∫ tr(Δ(m)Δ(n)) Δ(m) dm = Δ(n)
  double trace_duality = 0.0;      ///< (d) tr(AB) = (d/4π) ∫ A^SW B^SW
  double covariance = 0.0;         ///< (e) π(g) Δ(n) π(g)^† = Δ(Ad_g n)

  double max() const {
    return std::max({hermiticity, resolution, reproducing, trace_duality, covariance});
  }
};

/**
 * @brief Stratonovich-Weyl kernel of a spin irrep.
 *
 * A kernel built with only an irrep works in coefficient space. build_kernel
 * additionally stores Δ at the nodes of a grid exact to 4j + 2.
 */
class SWKernel {
 public:
  explicit SWKernel(const SpinIrrep& irrep)
      : irrep_(std::make_shared<const SpinIrrep>(irrep)), basis_(tensor_basis(irrep.two_j())) {}

  const SpinIrrep& irrep() const { return *irrep_; }
  const TensorBasis& basis() const { return *basis_; }
  int two_j() const { return irrep_->two_j(); }
  int dim() const { return irrep_->dim(); }

  /// Coefficient c_l attached to conj(Y_lm) T_lm (independent of l).
  double coefficient(int /*l*/) const { return std::sqrt(4.0 * kPi / dim()); }

  /// Δ(θ, φ).
  Matrix at(double theta, double phi) const {
    const int L = two_j();
    const LegendreRow row(L, theta);
    Matrix delta = Matrix::Zero(dim(), dim());
    const double c = coefficient(0);
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m)
        basis_->accumulate(l, m, c * row.signed_value(l, m) * std::exp(-kI * (m * phi)), delta);
    return delta;
  }

  /// Δ(n) for a unit vector.
  Matrix at(const Vec3& n) const {
    return at(std::acos(std::clamp(n(2), -1.0, 1.0)), std::atan2(n(1), n(0)));
  }

  bool has_samples() const { return grid_ != nullptr; }
  const Grid& grid() const {
    if (!grid_) throw std::logic_error("kernel has no grid samples");
    return *grid_;
  }
  const std::vector<Matrix>& samples() const { return samples_; }
  const KernelAxioms& axioms() const { return axioms_; }

 private:
  friend SWKernel build_kernel(const SpinIrrep&, const Grid&);

  std::shared_ptr<const SpinIrrep> irrep_;
  std::shared_ptr<const TensorBasis> basis_;
  std::shared_ptr<const Grid> grid_;
  std::vector<Matrix> samples_;
  KernelAxioms axioms_;
};

// ============================================================================
// Quantization maps
// ============================================================================

/// Operator of a (matrix-valued) symbol; components with l > 2j are dropped.
inline Matrix quantize(const SphereSymbol& f, const SWKernel& kernel) {
  const int d = kernel.dim();
  const int k = f.block();
  const TensorBasis& basis = kernel.basis();
  const double scale = 1.0 / kernel.coefficient(0);
  const int L = std::min(f.band_limit(), kernel.two_j());
  Matrix out = Matrix::Zero(d * k, d * k);
  if (k == 1) {
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) basis.accumulate(l, m, scale * f(l, m), out);
    return out;
  }
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) {
      const Matrix c = scale * f.coefficient(l, m);
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      for (int e = 0; e < basis.length(m); ++e)
        out.block(basis.row(m, e) * k, basis.col(m, e) * k, k, k) += basis.entry(l, m, e) * c;
    }
  return out;
}

/// Stratonovich-Weyl symbol of an operator on H_j ⊗ C^block.
inline SphereSymbol dequantize(const Matrix& a, const SWKernel& kernel, int block = 1) {
  const int d = kernel.dim();
  if (a.rows() != d * block || a.cols() != d * block)
    throw std::invalid_argument("operator dimension does not match kernel and block size");
  const TensorBasis& basis = kernel.basis();
  const double scale = kernel.coefficient(0);
  const int L = kernel.two_j();
  SphereSymbol out(L, block);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) {
      if (block == 1) {
        out(l, m) = scale * basis.inner(l, m, a);
        continue;
      }
      Matrix acc = Matrix::Zero(block, block);
      for (int e = 0; e < basis.length(m); ++e)
        acc += basis.entry(l, m, e) * a.block(basis.row(m, e) * block, basis.col(m, e) * block,
                                              block, block);
      out.set_coefficient(l, m, scale * acc);
    }
  return out;
}

/// (d/4π) Σ_nodes w f(n) Δ(n) for a scalar grid field (needs kernel samples).
inline Matrix quantize_on_grid(const GridField& f, const SWKernel& kernel) {
  if (f.block != 1) throw std::invalid_argument("quantize_on_grid expects a scalar field");
  const Grid& grid = kernel.grid();
  Matrix out = Matrix::Zero(kernel.dim(), kernel.dim());
  for (int p = 0; p < grid.size(); ++p) out += (grid.weight(p) * f.values(0, p)) * kernel.samples()[p];
  return out * (kernel.dim() / (4.0 * kPi));
}

/// tr(Δ(n) A) at every node of the kernel grid.
inline GridField dequantize_on_grid(const Matrix& a, const SWKernel& kernel) {
  const Grid& grid = kernel.grid();
  GridField out(grid.size(), 1);
  for (int p = 0; p < grid.size(); ++p)
    out.values(0, p) = (kernel.samples()[p] * a).trace();
  return out;
}

// ============================================================================
// Kernel construction and property residuals
// ============================================================================

namespace detail {

inline Matrix random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 n(g(rng), g(rng), g(rng));
  return n.normalized();
}

}  // namespace detail

/**
 * @brief Residuals of properties (a)-(e) for a kernel with grid samples.
 *
 * (c) is checked at n_points random points, (d) on n_pairs random hermitian
 * pairs, (e) for n_group random group elements at n_points points each.
 */
inline KernelAxioms kernel_axiom_residuals(const SWKernel& kernel, std::uint64_t seed,
                                           int n_group = 20, int n_pairs = 20,
                                           int n_points = 4) {
  const Grid& grid = kernel.grid();
  const auto& delta = kernel.samples();
  const int d = kernel.dim();
  const double pref = d / (4.0 * kPi);
  std::mt19937_64 rng(seed);
  KernelAxioms r;

  Matrix resolution = Matrix::Zero(d, d);
  for (int p = 0; p < grid.size(); ++p) {
    r.hermiticity = std::max(r.hermiticity, max_abs(delta[p] - delta[p].adjoint()));
    resolution += grid.weight(p) * delta[p];
  }
  r.resolution = max_abs(pref * resolution - Matrix::Identity(d, d));

  for (int k = 0; k < n_points; ++k) {
    const Matrix dn = kernel.at(detail::random_unit(rng));
    Matrix acc = Matrix::Zero(d, d);
    for (int p = 0; p < grid.size(); ++p)
      acc += (grid.weight(p) * (delta[p] * dn).trace()) * delta[p];
    r.reproducing = std::max(r.reproducing, max_abs(pref * acc - dn));
  }

  for (int k = 0; k < n_pairs; ++k) {
    const Matrix a = detail::random_hermitian(d, rng);
    const Matrix b = detail::random_hermitian(d, rng);
    const GridField sa = dequantize_on_grid(a, kernel);
    const GridField sb = dequantize_on_grid(b, kernel);
    cplx acc = 0.0;
    for (int p = 0; p < grid.size(); ++p) acc += grid.weight(p) * sa.values(0, p) * sb.values(0, p);
    const cplx exact = (a * b).trace();
    r.trace_duality = std::max(r.trace_duality, std::abs(pref * acc - exact) / (1.0 + std::abs(exact)));
  }

  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> polar(0.0, kPi);
  for (int k = 0; k < n_group; ++k) {
    const Matrix u = wigner_zyz(kernel.irrep(), angle(rng), polar(rng), angle(rng));
    const Mat3 rot = adjoint_rotation(kernel.irrep(), u);
    for (int q = 0; q < n_points; ++q) {
      const Vec3 n = detail::random_unit(rng);
      r.covariance =
          std::max(r.covariance, max_abs(u * kernel.at(n) * u.adjoint() - kernel.at(rot * n)));
    }
  }
  return r;
}

/**
 * @brief Kernel with samples on a grid exact to 4j + 2, properties verified.
 *
 * Throws std::invalid_argument for an insufficient grid and
 * std::runtime_error if any property residual exceeds 1e-10.
 */
inline SWKernel build_kernel(const SpinIrrep& irrep, const Grid& grid) {
  if (grid.l_exact() < 2 * irrep.two_j() + 2)
    throw std::invalid_argument("kernel grid must be exact to 4j+2 = " +
                                std::to_string(2 * irrep.two_j() + 2));
  SWKernel kernel(irrep);
  kernel.grid_ = std::make_shared<const Grid>(grid);
  kernel.samples_.reserve(grid.size());
  for (int p = 0; p < grid.size(); ++p)
    kernel.samples_.push_back(
        kernel.at(grid.theta(grid.ring(p)), grid.phi(grid.column(p))));
  kernel.axioms_ = kernel_axiom_residuals(kernel, 0, 4, 4, 2);
  if (kernel.axioms_.max() > 1e-10)
    throw std::runtime_error("kernel property residual " + std::to_string(kernel.axioms_.max()) +
                             " exceeds 1e-10");
  return kernel;
}

// ============================================================================
// Spin-coherent lower symbols
// ============================================================================

/// β_l = <j j; l 0 | j j>, the lower-symbol multiplier of degree l.
inline double coherent_multiplier(int two_j, int l) {
  if (l < 0 || l > two_j) return 0.0;
  return std::exp(std::lgamma(two_j + 1.0) + 0.5 * std::log(two_j + 1.0) -
                  0.5 * (std::lgamma(two_j - l + 1.0) + std::lgamma(two_j + l + 2.0)));
}

/// Condition number of the lower-symbol map on B(H_j).
inline double lower_symbol_condition(int two_j) {
  return coherent_multiplier(two_j, 0) / coherent_multiplier(two_j, two_j);
}

/// n ↦ <ζ_n| A |ζ_n> sampled on a grid and analyzed at band 2j.
inline SphereSymbol lower_symbol(const Matrix& a, const SpinIrrep& irrep, const Grid& grid,
                                 int block = 1) {
  const int d = irrep.dim();
  if (a.rows() != d * block) throw std::invalid_argument("operator dimension mismatch");
  GridField samples(grid.size(), block);
  for (int p = 0; p < grid.size(); ++p) {
    const Vector z = coherent_state(irrep, grid.point(p));
    Matrix v = Matrix::Zero(block, block);
    for (int r = 0; r < block; ++r)
      for (int c = 0; c < block; ++c) {
        cplx acc = 0.0;
        for (int x = 0; x < d; ++x)
          for (int y = 0; y < d; ++y) acc += std::conj(z(x)) * a(x * block + r, y * block + c) * z(y);
        v(r, c) = acc;
      }
    samples.set(p, v);
  }
  return sh_analysis(samples, grid, irrep.two_j());
}

/// Lower symbol in coefficient space: degree-l components scaled by β_l.
inline SphereSymbol lower_symbol_spectral(const Matrix& a, const SWKernel& kernel, int block = 1) {
  SphereSymbol s = dequantize(a, kernel, block);
  for (int l = 0; l <= s.band_limit(); ++l)
    for (int m = -l; m <= l; ++m)
      s.data().col(sh_index(l, m)) *= coherent_multiplier(kernel.two_j(), l);
  return s;
}

/// The unique operator whose lower symbol is f; throws for components l > 2j.
inline Matrix lower_symbol_inverse(const SphereSymbol& f, const SWKernel& kernel) {
  const int L = kernel.two_j();
  const double scale = 1.0 + max_abs(f.data());
  for (int l = L + 1; l <= f.band_limit(); ++l)
    for (int m = -l; m <= l; ++m)
      if (max_abs(f.data().col(sh_index(l, m))) > 1e-12 * scale)
        throw std::invalid_argument("symbol has components with l > 2j outside the lower-symbol range");
  SphereSymbol g = f.with_band_limit(std::min(f.band_limit(), L));
  for (int l = 0; l <= g.band_limit(); ++l)
    for (int m = -l; m <= l; ++m) g.data().col(sh_index(l, m)) /= coherent_multiplier(L, l);
  return quantize(g, kernel);
}

}  // namespace sphere_sapt
