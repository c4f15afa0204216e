// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file sphere_calculus.hpp
 * @brief Band-limited spherical harmonic calculus on S².
 *
 * Spherical harmonics are complex, orthonormal with respect to the surface
 * measure of total mass 4π, and carry the Condon-Shortley phase:
 *   Y_lm(θ, φ) = P̄_lm(cos θ) e^{imφ},  Y_{l,-m} = (-1)^m conj(Y_lm).
 *
 * Coefficients are stored with flat index idx(l, m) = l(l+1) + m. A symbol of
 * block size k stores a k×k matrix per coefficient, column-major in one column
 * of a (k², (L+1)²) array. Grid fields use the same per-node layout.
 *
 * Tangential gradients are represented by the pair (∂_θ f, (1/sin θ) ∂_φ f),
 * both evaluated from analytic Legendre recurrences.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sphere_sapt/types.hpp"

namespace sphere_sapt {

/// Flat coefficient index of (l, m).
inline int sh_index(int l, int m) { return l * (l + 1) + m; }

/// Number of coefficients up to band limit L.
inline int sh_count(int L) { return (L + 1) * (L + 1); }

// ============================================================================
// Quadrature grid
// ============================================================================

/**
 * @brief Gauss-Legendre × uniform product grid.
 *
 * Integrates every band-limited function of degree <= l_exact exactly.
 * Node index is ring * n_phi + column; rings are ordered by increasing θ.
 */
class Grid {
 public:
  explicit Grid(int l_exact = 0) : l_exact_(l_exact) {
    if (l_exact < 0) throw std::invalid_argument("l_exact must be nonnegative");
    n_theta_ = l_exact / 2 + 1;
    n_phi_ = l_exact + 1;
    gauss_legendre(n_theta_, cos_theta_, gl_weights_);
    theta_.resize(n_theta_);
    sin_theta_.resize(n_theta_);
    for (int i = 0; i < n_theta_; ++i) {
      theta_[i] = std::acos(cos_theta_[i]);
      sin_theta_[i] = std::sqrt((1.0 - cos_theta_[i]) * (1.0 + cos_theta_[i]));
    }
  }

  int l_exact() const { return l_exact_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int size() const { return n_theta_ * n_phi_; }

  int node(int ring, int column) const { return ring * n_phi_ + column; }
  int ring(int node) const { return node / n_phi_; }
  int column(int node) const { return node % n_phi_; }

  double theta(int ring) const { return theta_[ring]; }
  double cos_theta(int ring) const { return cos_theta_[ring]; }
  double sin_theta(int ring) const { return sin_theta_[ring]; }
  double phi(int column) const { return 2.0 * kPi * column / n_phi_; }

  /// Quadrature weight of a node; weights sum to 4π.
  double weight(int node) const { return gl_weights_[ring(node)] * 2.0 * kPi / n_phi_; }

  Vec3 point(int node) const { return unit_vector(theta_[ring(node)], phi(column(node))); }

 private:
  static void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 1.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double step = p1 / dp;
        z -= step;
        if (std::abs(step) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  int l_exact_;
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_, cos_theta_, sin_theta_, gl_weights_;
};

/// Builds a grid exact for band limit l_exact.
inline Grid make_grid(int l_exact) { return Grid(l_exact); }

/// Shared read-only grid from a process-wide cache.
inline std::shared_ptr<const Grid> cached_grid(int l_exact) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const Grid>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[l_exact];
  if (!slot) slot = std::make_shared<const Grid>(l_exact);
  return slot;
}

// ============================================================================
// Normalized associated Legendre functions
// ============================================================================

/**
 * @brief P̄_lm, dP̄_lm/dθ and P̄_lm / sin θ for 0 <= m <= l <= L at one angle.
 *
 * Storage index is l(l+1)/2 + m.
 */
struct LegendreRow {
  int band_limit = 0;
  std::vector<double> value, d_theta, over_sin;

  static int pos(int l, int m) { return l * (l + 1) / 2 + m; }

  LegendreRow() = default;

  LegendreRow(int L, double theta) : band_limit(L) {
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    const int n = (L + 1) * (L + 2) / 2;
    value.assign(n, 0.0);
    d_theta.assign(n, 0.0);
    over_sin.assign(n, 0.0);

    value[pos(0, 0)] = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 1; m <= L; ++m)
      value[pos(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * value[pos(m - 1, m - 1)];
    for (int m = 0; m < L; ++m) {
      value[pos(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * value[pos(m, m)];
      for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                   (4.0 * (l - 1) * (l - 1) - 1.0));
        value[pos(l, m)] = a * (x * value[pos(l - 1, m)] - b * value[pos(l - 2, m)]);
      }
    }
    for (int l = 0; l <= L; ++l) {
      for (int m = 0; m <= l; ++m) {
        const double up = m + 1 <= l ? value[pos(l, m + 1)] : 0.0;
        const double down = m >= 1 ? value[pos(l, m - 1)] : -up;
        const double cu = std::sqrt(double(l - m) * (l + m + 1));
        const double cd = std::sqrt(double(l + m) * (l - m + 1));
        d_theta[pos(l, m)] = 0.5 * (cu * up - cd * down);
        over_sin[pos(l, m)] = (m == 0 || s == 0.0) ? 0.0 : value[pos(l, m)] / s;
      }
    }
  }

  /// Signed lookup for negative m: P̄_{l,-m} = (-1)^m P̄_lm.
  double signed_value(int l, int m) const {
    const double v = value[pos(l, std::abs(m))];
    return (m < 0 && (m % 2)) ? -v : v;
  }
  double signed_d_theta(int l, int m) const {
    const double v = d_theta[pos(l, std::abs(m))];
    return (m < 0 && (m % 2)) ? -v : v;
  }
  double signed_over_sin(int l, int m) const {
    const double v = over_sin[pos(l, std::abs(m))];
    return (m < 0 && (m % 2)) ? -v : v;
  }
};

/// Legendre rows for every ring of a grid, cached per (l_exact, L).
inline std::shared_ptr<const std::vector<LegendreRow>> legendre_table(const Grid& grid, int L) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const std::vector<LegendreRow>>> cache;
  const auto key = std::make_pair(grid.l_exact(), L);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto rows = std::make_shared<std::vector<LegendreRow>>();
  rows->reserve(grid.n_theta());
  for (int i = 0; i < grid.n_theta(); ++i) rows->emplace_back(L, grid.theta(i));
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(rows)).first->second;
}

/// Y_lm(θ, φ) for a single (l, m).
inline cplx spherical_harmonic(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) return 0.0;
  const LegendreRow row(l, theta);
  return row.signed_value(l, m) * std::exp(kI * (m * phi));
}

// ============================================================================
// Symbols and grid fields
// ============================================================================

/// Band-limited scalar- or matrix-valued function on S² in coefficient form.
class SphereSymbol {
 public:
  SphereSymbol() : SphereSymbol(0, 1) {}

  SphereSymbol(int band_limit, int block)
      : band_limit_(band_limit), block_(block),
        data_(Matrix::Zero(block * block, sh_count(band_limit))) {
    if (band_limit < 0 || block < 1) throw std::invalid_argument("invalid symbol shape");
  }

  int band_limit() const { return band_limit_; }
  int block() const { return block_; }

  /// Raw (k², (L+1)²) coefficient array.
  Matrix& data() { return data_; }
  const Matrix& data() const { return data_; }

  cplx& operator()(int l, int m, int r = 0, int c = 0) {
    return data_(r + block_ * c, sh_index(l, m));
  }
  cplx operator()(int l, int m, int r = 0, int c = 0) const {
    return data_(r + block_ * c, sh_index(l, m));
  }

  /// k×k coefficient of Y_lm.
  Matrix coefficient(int l, int m) const {
    return Eigen::Map<const Matrix>(data_.col(sh_index(l, m)).data(), block_, block_);
  }

  void set_coefficient(int l, int m, const Matrix& value) {
    Eigen::Map<Matrix>(data_.col(sh_index(l, m)).data(), block_, block_) = value;
  }

  /// Copy with a different band limit (truncating or zero-padding).
  SphereSymbol with_band_limit(int L) const {
    SphereSymbol out(L, block_);
    const int n = std::min(sh_count(L), sh_count(band_limit_));
    out.data_.leftCols(n) = data_.leftCols(n);
    return out;
  }

  /// Constant symbol with value c·identity_k.
  static SphereSymbol constant(cplx c, int block = 1) {
    return constant(c * Matrix::Identity(block, block));
  }

  /// Constant matrix-valued symbol.
  static SphereSymbol constant(const Matrix& value) {
    SphereSymbol out(0, static_cast<int>(value.rows()));
    out.set_coefficient(0, 0, value * std::sqrt(4.0 * kPi));
    return out;
  }

  /// c·Y_lm.
  static SphereSymbol harmonic(int l, int m, cplx c = 1.0) {
    SphereSymbol out(l, 1);
    out(l, m) = c;
    return out;
  }

  /// Cartesian coordinate function n_a (a = 0, 1, 2).
  static SphereSymbol coordinate(int a) {
    const double s = std::sqrt(4.0 * kPi / 3.0);
    SphereSymbol out(1, 1);
    switch (a) {
      case 0:
        out(1, -1) = s / std::sqrt(2.0);
        out(1, 1) = -s / std::sqrt(2.0);
        break;
      case 1:
        out(1, -1) = kI * s / std::sqrt(2.0);
        out(1, 1) = kI * s / std::sqrt(2.0);
        break;
      case 2: out(1, 0) = s; break;
      default: throw std::out_of_range("coordinate index must be 0, 1 or 2");
    }
    return out;
  }

  /// Value at (θ, φ).
  Matrix evaluate(double theta, double phi) const {
    const LegendreRow row(band_limit_, theta);
    Vector acc = Vector::Zero(block_ * block_);
    for (int l = 0; l <= band_limit_; ++l)
      for (int m = -l; m <= l; ++m)
        acc += data_.col(sh_index(l, m)) * (row.signed_value(l, m) * std::exp(kI * (m * phi)));
    return Eigen::Map<const Matrix>(acc.data(), block_, block_);
  }

  /// Value at a unit vector.
  Matrix evaluate(const Vec3& n) const {
    return evaluate(std::acos(std::clamp(n(2), -1.0, 1.0)), std::atan2(n(1), n(0)));
  }

  /// Pointwise conjugate transpose.
  SphereSymbol adjoint() const {
    SphereSymbol out(band_limit_, block_);
    for (int l = 0; l <= band_limit_; ++l)
      for (int m = -l; m <= l; ++m) {
        const double sign = (m % 2) ? -1.0 : 1.0;
        out.set_coefficient(l, m, sign * coefficient(l, -m).adjoint());
      }
    return out;
  }

  /// Largest coefficient deviation from a_{l,-m} = (-1)^m a_lm^†.
  double hermiticity_residual() const { return max_abs((adjoint().data_ - data_).eval()); }

  SphereSymbol& operator+=(const SphereSymbol& other) {
    align(other);
    data_.leftCols(other.data_.cols()) += other.data_;
    return *this;
  }
  SphereSymbol& operator-=(const SphereSymbol& other) {
    align(other);
    data_.leftCols(other.data_.cols()) -= other.data_;
    return *this;
  }
  SphereSymbol& operator*=(cplx c) {
    data_ *= c;
    return *this;
  }

  friend SphereSymbol operator+(SphereSymbol a, const SphereSymbol& b) { return a += b; }
  friend SphereSymbol operator-(SphereSymbol a, const SphereSymbol& b) { return a -= b; }
  friend SphereSymbol operator*(SphereSymbol a, cplx c) { return a *= c; }
  friend SphereSymbol operator*(cplx c, SphereSymbol a) { return a *= c; }
  friend SphereSymbol operator*(double c, SphereSymbol a) { return a *= c; }

  /// Pointwise product with a constant matrix on the right.
  SphereSymbol times_right(const Matrix& m) const {
    SphereSymbol out(band_limit_, block_);
    for (int i = 0; i < sh_count(band_limit_); ++i) {
      Eigen::Map<Matrix>(out.data_.col(i).data(), block_, block_) =
          Eigen::Map<const Matrix>(data_.col(i).data(), block_, block_) * m;
    }
    return out;
  }

  /// Pointwise product with a constant matrix on the left.
  SphereSymbol times_left(const Matrix& m) const {
    SphereSymbol out(band_limit_, block_);
    for (int i = 0; i < sh_count(band_limit_); ++i) {
      Eigen::Map<Matrix>(out.data_.col(i).data(), block_, block_) =
          m * Eigen::Map<const Matrix>(data_.col(i).data(), block_, block_);
    }
    return out;
  }

 private:
  void align(const SphereSymbol& other) {
    if (other.block_ != block_) throw std::invalid_argument("block size mismatch");
    if (other.band_limit_ > band_limit_) *this = with_band_limit(other.band_limit_);
  }

  int band_limit_;
  int block_;
  Matrix data_;
};

/// The matrix-valued symbol n ↦ f(n)·m for a scalar symbol f.
inline SphereSymbol scalar_times(const SphereSymbol& f, const Matrix& m) {
  if (f.block() != 1 || m.rows() != m.cols()) throw std::invalid_argument("expected scalar f and square m");
  const int k = static_cast<int>(m.rows());
  SphereSymbol out(f.band_limit(), k);
  for (int i = 0; i < sh_count(f.band_limit()); ++i)
    out.data().col(i) = f.data()(0, i) * m.reshaped();
  return out;
}

/// Samples of a (matrix-valued) function at the nodes of a grid.
struct GridField {
  int block = 1;
  Matrix values;  ///< (k², nodes)

  GridField() = default;
  GridField(int nodes, int k) : block(k), values(Matrix::Zero(k * k, nodes)) {}

  int nodes() const { return static_cast<int>(values.cols()); }

  Matrix at(int node) const {
    return Eigen::Map<const Matrix>(values.col(node).data(), block, block);
  }
  void set(int node, const Matrix& v) {
    Eigen::Map<Matrix>(values.col(node).data(), block, block) = v;
  }

  GridField& operator+=(const GridField& o) {
    values += o.values;
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    values -= o.values;
    return *this;
  }
  GridField& operator*=(cplx c) {
    values *= c;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(cplx c, GridField a) { return a *= c; }
};

/// Pointwise matrix product a(n)·b(n) in the written order.
inline GridField multiply(const GridField& a, const GridField& b) {
  if (a.block != b.block || a.nodes() != b.nodes())
    throw std::invalid_argument("grid field shape mismatch");
  const int k = a.block;
  GridField out(a.nodes(), k);
  if (k == 1) {
    out.values = a.values.cwiseProduct(b.values);
    return out;
  }
  for (int p = 0; p < a.nodes(); ++p) {
    Eigen::Map<Matrix>(out.values.col(p).data(), k, k) =
        Eigen::Map<const Matrix>(a.values.col(p).data(), k, k) *
        Eigen::Map<const Matrix>(b.values.col(p).data(), k, k);
  }
  return out;
}

// ============================================================================
// Transforms
// ============================================================================

/// Which derivative of the symbol to synthesize.
enum class Derivative { value, d_theta, d_phi_over_sin };

/// Samples a symbol (or one of its first derivatives) on a grid.
inline GridField sh_synthesis(const SphereSymbol& f, const Grid& grid,
                              Derivative which = Derivative::value) {
  const int L = f.band_limit();
  const int kk = f.block() * f.block();
  const auto table = legendre_table(grid, L);
  GridField out(grid.size(), f.block());

  std::vector<cplx> twiddle(static_cast<std::size_t>(grid.n_phi()) * (2 * L + 1));
  for (int j = 0; j < grid.n_phi(); ++j)
    for (int m = -L; m <= L; ++m)
      twiddle[static_cast<std::size_t>(j) * (2 * L + 1) + (m + L)] =
          std::exp(kI * (m * grid.phi(j)));

  Matrix ring_coeffs(kk, 2 * L + 1);
  for (int i = 0; i < grid.n_theta(); ++i) {
    const LegendreRow& row = (*table)[i];
    ring_coeffs.setZero();
    for (int l = 0; l <= L; ++l) {
      for (int m = -l; m <= l; ++m) {
        cplx factor;
        switch (which) {
          case Derivative::value: factor = row.signed_value(l, m); break;
          case Derivative::d_theta: factor = row.signed_d_theta(l, m); break;
          default: factor = kI * double(m) * row.signed_over_sin(l, m); break;
        }
        ring_coeffs.col(m + L) += factor * f.data().col(sh_index(l, m));
      }
    }
    for (int j = 0; j < grid.n_phi(); ++j) {
      const cplx* tw = &twiddle[static_cast<std::size_t>(j) * (2 * L + 1)];
      auto col = out.values.col(grid.node(i, j));
      for (int m = 0; m < 2 * L + 1; ++m) col += ring_coeffs.col(m) * tw[m];
    }
  }
  return out;
}

/// Projects grid samples onto spherical harmonics up to band limit L.
inline SphereSymbol sh_analysis(const GridField& samples, const Grid& grid, int L) {
  if (2 * L > grid.l_exact())
    throw std::invalid_argument("insufficient grid: analysis at band " + std::to_string(L) +
                                " needs l_exact >= " + std::to_string(2 * L));
  if (samples.nodes() != grid.size()) throw std::invalid_argument("sample count mismatch");
  const int kk = samples.block * samples.block;
  const auto table = legendre_table(grid, L);
  SphereSymbol out(L, samples.block);

  std::vector<cplx> twiddle(static_cast<std::size_t>(grid.n_phi()) * (2 * L + 1));
  for (int j = 0; j < grid.n_phi(); ++j)
    for (int m = -L; m <= L; ++m)
      twiddle[static_cast<std::size_t>(j) * (2 * L + 1) + (m + L)] =
          std::exp(-kI * (m * grid.phi(j)));

  Matrix ring_coeffs(kk, 2 * L + 1);
  for (int i = 0; i < grid.n_theta(); ++i) {
    ring_coeffs.setZero();
    for (int j = 0; j < grid.n_phi(); ++j) {
      const auto col = samples.values.col(grid.node(i, j));
      const cplx* tw = &twiddle[static_cast<std::size_t>(j) * (2 * L + 1)];
      for (int m = 0; m < 2 * L + 1; ++m) ring_coeffs.col(m) += col * tw[m];
    }
    const double w = grid.weight(grid.node(i, 0));
    const LegendreRow& row = (*table)[i];
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m)
        out.data().col(sh_index(l, m)) += (w * row.signed_value(l, m)) * ring_coeffs.col(m + L);
  }
  return out;
}

/// Grid integral with total measure 4π.
inline Matrix integrate(const GridField& f, const Grid& grid) {
  Vector acc = Vector::Zero(f.block * f.block);
  for (int p = 0; p < grid.size(); ++p) acc += grid.weight(p) * f.values.col(p);
  return Eigen::Map<const Matrix>(acc.data(), f.block, f.block);
}

/// Integral of a band-limited symbol (exact, from the l = 0 coefficient).
inline Matrix integrate(const SphereSymbol& f) {
  return std::sqrt(4.0 * kPi) * f.coefficient(0, 0);
}

// ============================================================================
// Differential operators
// ============================================================================

/// (n × ∇)², acting as -l(l+1) on degree-l components.
inline SphereSymbol angular_square(const SphereSymbol& f) {
  SphereSymbol out = f;
  for (int l = 1; l <= f.band_limit(); ++l)
    for (int m = -l; m <= l; ++m) out.data().col(sh_index(l, m)) *= -double(l) * (l + 1);
  out.data().col(0).setZero();
  return out;
}

/// Value and tangential gradient of a symbol on a grid.
struct Jet {
  GridField value, d_theta, d_phi;  ///< d_phi holds (1/sin θ) ∂_φ
};

inline Jet make_jet(const SphereSymbol& f, const Grid& grid) {
  return Jet{sh_synthesis(f, grid, Derivative::value), sh_synthesis(f, grid, Derivative::d_theta),
             sh_synthesis(f, grid, Derivative::d_phi_over_sin)};
}

/// ∇f·∇g at the nodes, factors in the written order.
inline GridField gradient_dot(const Jet& f, const Jet& g) {
  return multiply(f.d_theta, g.d_theta) + multiply(f.d_phi, g.d_phi);
}

/// n·(∇f × ∇g) at the nodes, factors in the written order.
inline GridField gradient_cross(const Jet& f, const Jet& g) {
  return multiply(f.d_theta, g.d_phi) - multiply(f.d_phi, g.d_theta);
}

/// Pair of gradient bilinears (∇f·∇g, n·(∇f × ∇g)).
struct GradientBilinears {
  SphereSymbol dot;
  SphereSymbol cross;
};

/**
 * @brief ∇f·∇g and n·(∇f×∇g), band-limited at L_f + L_g.
 *
 * The products are formed on a grid exact to 2(L_f + L_g) and re-analyzed.
 */
inline GradientBilinears gradient_bilinears(const SphereSymbol& f, const SphereSymbol& g) {
  if (f.block() != g.block()) throw std::invalid_argument("block size mismatch");
  const int L = f.band_limit() + g.band_limit();
  const auto grid = cached_grid(2 * L);
  const Jet jf = make_jet(f, *grid);
  const Jet jg = make_jet(g, *grid);
  return {sh_analysis(gradient_dot(jf, jg), *grid, L),
          sh_analysis(gradient_cross(jf, jg), *grid, L)};
}

/// Pointwise product f·g, band-limited at L_f + L_g.
inline SphereSymbol pointwise_product(const SphereSymbol& f, const SphereSymbol& g) {
  if (f.block() != g.block()) throw std::invalid_argument("block size mismatch");
  const int L = f.band_limit() + g.band_limit();
  const auto grid = cached_grid(2 * L);
  return sh_analysis(multiply(sh_synthesis(f, *grid), sh_synthesis(g, *grid)), *grid, L);
}

/// Largest absolute sample difference on a grid.
inline double sup_distance(const SphereSymbol& a, const SphereSymbol& b, const Grid& grid) {
  return max_abs(sh_synthesis(a - b, grid).values);
}

}  // namespace sphere_sapt
