// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file star_product.hpp
 * @brief Exact and asymptotic star products of symbols on S².
 *
 * Two expansion families are provided, each with a `printed` and a
 * `calibrated` coefficient set. The order-1 term of a product of
 * semiclassical symbols A ~ Σ d^-k A_k, B ~ Σ d^-k B_k is
 *
 *   x1 = A0 B1 + A1 B0 + B1(A0, B0),
 *   B1(a, b) = c_p ab + c_Λ (Λa b + a Λb) + c_dot ∇a·∇b + i c_P n·(∇a × ∇b),
 *
 * with Λ = (n × ∇)². The printed tables additionally carry an order-2 term;
 * the calibrated tables are order-1 only. Matrix-valued factors always
 * multiply in the written order.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>


#include "sphere_sapt/slope_fit.hpp"
#include "sphere_sapt/sphere_calculus.hpp"
#include "sphere_sapt/sw_quant.hpp"

namespace sphere_sapt {

enum class ExpansionFamily { moyal, berezin };
enum class CoefficientSet { printed, calibrated };

inline std::string to_string(ExpansionFamily f) {
  return f == ExpansionFamily::moyal ? "moyal" : "berezin";
}
inline std::string to_string(CoefficientSet s) {
  return s == CoefficientSet::printed ? "printed" : "calibrated";
}
inline CoefficientSet parse_coefficient_set(const std::string& s) {
  if (s == "printed") return CoefficientSet::printed;
  if (s == "calibrated") return CoefficientSet::calibrated;
  throw std::invalid_argument("unknown coefficient set: " + s);
}

/// Coefficients of the order-1 bilinear B1.
struct FirstOrderCoefficients {
  double product = 0.0;       ///< a b
  double laplacian = 0.0;     ///< Λa b + a Λb
  double gradient_dot = 0.0;  ///< ∇a·∇b
  double poisson = 1.0;       ///< i n·(∇a × ∇b)
};

/// Coefficients of the order-2 term beyond A0B2 + A1B1 + A2B0.
struct SecondOrderCoefficients {
  double product_first = 0.0;      ///< A0 B1 + A1 B0
  double laplacian_first = 0.0;    ///< ΛA0 B1 + ΛA1 B0 + A0 ΛB1 + A1 ΛB0
  double dot_first = 0.0;          ///< ∇A0·∇B1 + ∇A1·∇B0
  double cross_first = 0.0;        ///< i(∇A0×∇B1 + ∇A1×∇B0)
  double laplacian_sum = 0.0;      ///< ΛA0 B0 + A0 ΛB0
  double laplacian_product = 0.0;  ///< ΛA0 ΛB0
  double laplacian_of_dot = 0.0;   ///< Λ(∇A0·∇B0)
  double grad_lap_dot_left = 0.0;  ///< ∇ΛA0·∇B0
  double grad_lap_dot_right = 0.0; ///< ∇A0·∇ΛB0
  double dot = 0.0;                ///< ∇A0·∇B0
  double cross = 0.0;              ///< i ∇A0×∇B0
  double cross_lap_left = 0.0;     ///< i ∇ΛA0×∇B0
  double cross_lap_right = 0.0;    ///< i ∇A0×∇ΛB0
  double laplacian_of_cross = 0.0; ///< i Λ(∇A0×∇B0)
};

/// A complete coefficient table.
struct StarCoefficients {
  ExpansionFamily family = ExpansionFamily::moyal;
  CoefficientSet set = CoefficientSet::printed;
  FirstOrderCoefficients first;
  std::optional<SecondOrderCoefficients> second;
};

/// Coefficients exactly as printed for the chosen family.
inline StarCoefficients printed_coefficients(ExpansionFamily family) {
  StarCoefficients c;
  c.family = family;
  c.set = CoefficientSet::printed;
  SecondOrderCoefficients s;
  if (family == ExpansionFamily::moyal) {
    c.first = {-0.5, 1.0, 0.0, 1.0};
    s.laplacian_first = 1.0;
    s.laplacian_product = -0.5;
    s.laplacian_of_dot = 0.25;
    s.grad_lap_dot_left = s.grad_lap_dot_right = -2.25;
    s.dot = -3.5;
    s.cross_first = 1.0;
    s.cross = -6.0;
    s.cross_lap_left = s.cross_lap_right = 1.0;
  } else {
    c.first = {-0.5, 0.0, -1.0, 1.0};
    s.dot_first = -1.0;
    s.dot = -3.0;
    s.laplacian_sum = 0.5;
    s.laplacian_product = -0.5;
    s.laplacian_of_dot = 0.5;
    s.grad_lap_dot_left = s.grad_lap_dot_right = -0.5;
    s.cross_first = 1.0;
    s.cross = -6.0;
    s.cross_lap_left = 0.5;
    s.cross_lap_right = 1.0;
    s.laplacian_of_cross = -0.5;
  }
  c.second = s;
  return c;
}

// ============================================================================
// Semiclassical symbols
// ============================================================================

/// Ordered list [x0, x1, ...] of symbols in powers of 1/d.
class SemiclassicalSymbol {
 public:
  SemiclassicalSymbol() = default;
  explicit SemiclassicalSymbol(std::vector<SphereSymbol> terms) : terms_(std::move(terms)) {}

  int order() const { return static_cast<int>(terms_.size()) - 1; }
  int block() const { return terms_.empty() ? 1 : terms_.front().block(); }
  const std::vector<SphereSymbol>& terms() const { return terms_; }
  std::vector<SphereSymbol>& terms() { return terms_; }

  /// Term i, or the zero symbol beyond the stored order.
  SphereSymbol term(int i) const {
    if (i >= 0 && i < static_cast<int>(terms_.size())) return terms_[static_cast<std::size_t>(i)];
    return SphereSymbol(0, block());
  }

  int band_limit(int up_to) const {
    int L = 0;
    for (int i = 0; i <= std::min(up_to, order()); ++i)
      L = std::max(L, terms_[static_cast<std::size_t>(i)].band_limit());
    return L;
  }

  /// Σ_{i<=k} d^-i x_i (k < 0 sums every stored term).
  SphereSymbol truncated(double d, int k = -1) const {
    const int top = k < 0 ? order() : std::min(k, order());
    SphereSymbol out(band_limit(top), block());
    for (int i = 0; i <= top; ++i) out += std::pow(d, -i) * terms_[static_cast<std::size_t>(i)];
    return out;
  }

  bool is_hermitian(double tol = 1e-12) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [tol](const SphereSymbol& s) { return s.hermiticity_residual() < tol; });
  }

 private:
  std::vector<SphereSymbol> terms_;
};

// ============================================================================
// Exact products and brackets
// ============================================================================

/// dequantize(quantize(f) quantize(g)).
inline SphereSymbol star_exact(const SphereSymbol& f, const SphereSymbol& g,
                               const SWKernel& kernel) {
  if (f.block() != g.block()) throw std::invalid_argument("block size mismatch");
  return dequantize(quantize(f, kernel) * quantize(g, kernel), kernel, f.block());
}

/// Covariant (lower-symbol) product: lower(Â B̂) with lower(Â) = f, lower(B̂) = g.
inline SphereSymbol berezin_exact(const SphereSymbol& f, const SphereSymbol& g,
                                  const SWKernel& kernel) {
  if (f.block() != 1 || g.block() != 1)
    throw std::invalid_argument("berezin_exact is defined for scalar symbols");
  return lower_symbol_spectral(lower_symbol_inverse(f, kernel) * lower_symbol_inverse(g, kernel),
                               kernel);
}

inline SphereSymbol berezin_exact(const SphereSymbol& f, const SphereSymbol& g,
                                  const SpinIrrep& irrep) {
  return berezin_exact(f, g, SWKernel(irrep));
}

/// {f, g} = n·(∇f × ∇g), factors in the written order.
inline SphereSymbol poisson_bracket(const SphereSymbol& f, const SphereSymbol& g) {
  return gradient_bilinears(f, g).cross;
}

// ============================================================================
// Truncated expansions
// ============================================================================

namespace detail {

struct StarJet {
  Jet base;
  GridField lap;       // values of Λa
  Jet lap_jet;         // value and gradient of Λa (only when requested)
};

inline StarJet star_jet(const SphereSymbol& a, const Grid& grid, bool with_lap_gradient) {
  StarJet j;
  j.base = make_jet(a, grid);
  const SphereSymbol la = angular_square(a);
  if (with_lap_gradient) {
    j.lap_jet = make_jet(la, grid);
    j.lap = j.lap_jet.value;
  } else {
    j.lap = sh_synthesis(la, grid);
  }
  return j;
}

inline GridField first_order_field(const StarJet& a, const StarJet& b,
                                   const FirstOrderCoefficients& c) {
  GridField out(a.base.value.nodes(), a.base.value.block);
  if (c.product != 0.0) out += cplx(c.product) * multiply(a.base.value, b.base.value);
  if (c.laplacian != 0.0)
    out += cplx(c.laplacian) * (multiply(a.lap, b.base.value) + multiply(a.base.value, b.lap));
  if (c.gradient_dot != 0.0) out += cplx(c.gradient_dot) * gradient_dot(a.base, b.base);
  if (c.poisson != 0.0) out += (kI * c.poisson) * gradient_cross(a.base, b.base);
  return out;
}

inline int output_band(int la, int lb, int band_cap) {
  return band_cap >= 0 ? std::min(band_cap, la + lb) : la + lb;
}

}  // namespace detail

/**
 * @brief The order-1 bilinear B1(a, b).
 *
 * The result is band-limited at L_a + L_b, or at band_cap when given.
 */
inline SphereSymbol first_order_bilinear(const SphereSymbol& a, const SphereSymbol& b,
                                         const FirstOrderCoefficients& c, int band_cap = -1) {
  if (a.block() != b.block()) throw std::invalid_argument("block size mismatch");
  const int L = detail::output_band(a.band_limit(), b.band_limit(), band_cap);
  const auto grid = cached_grid(L + a.band_limit() + b.band_limit());
  const auto ja = detail::star_jet(a, *grid, false);
  const auto jb = detail::star_jet(b, *grid, false);
  return sh_analysis(detail::first_order_field(ja, jb, c), *grid, L);
}

/**
 * @brief Truncated star product of two semiclassical symbols, orders 0..k.
 *
 * Throws std::invalid_argument("unsupported order ...") for k outside
 * {0, 1, 2} and for k = 2 with a table that has no order-2 coefficients.
 */
inline SemiclassicalSymbol star_truncation(const SemiclassicalSymbol& F,
                                           const SemiclassicalSymbol& G, int k,
                                           const StarCoefficients& c, int band_cap = -1) {
  if (k < 0 || k > 2) throw std::invalid_argument("unsupported order " + std::to_string(k));
  if (k == 2 && !c.second)
    throw std::invalid_argument("unsupported order 2 for the " + to_string(c.set) + " " +
                                to_string(c.family) + " coefficient set");
  if (F.block() != G.block()) throw std::invalid_argument("block size mismatch");

  const int la = F.band_limit(k), lb = G.band_limit(k);
  const int L = detail::output_band(la, lb, band_cap);
  const auto grid = cached_grid(L + la + lb);
  const int block = F.block();

  std::vector<detail::StarJet> ja, jb;
  for (int i = 0; i <= k; ++i) {
    ja.push_back(detail::star_jet(F.term(i).with_band_limit(la), *grid, k == 2 && i == 0));
    jb.push_back(detail::star_jet(G.term(i).with_band_limit(lb), *grid, k == 2 && i == 0));
  }
  auto prod = [&](int i, int j) { return multiply(ja[i].base.value, jb[j].base.value); };

  std::vector<SphereSymbol> terms;
  terms.push_back(sh_analysis(prod(0, 0), *grid, L));
  if (k >= 1) {
    GridField x1 = prod(0, 1) + prod(1, 0) + detail::first_order_field(ja[0], jb[0], c.first);
    terms.push_back(sh_analysis(x1, *grid, L));
  }
  if (k == 2) {
    const SecondOrderCoefficients& s = *c.second;
    const auto& a0 = ja[0];
    const auto& a1 = ja[1];
    const auto& b0 = jb[0];
    const auto& b1 = jb[1];
    GridField x2 = prod(0, 2) + prod(1, 1) + prod(2, 0);
    x2 += cplx(s.product_first) * (prod(0, 1) + prod(1, 0));
    x2 += cplx(s.laplacian_first) *
          (multiply(a0.lap, b1.base.value) + multiply(a1.lap, b0.base.value) +
           multiply(a0.base.value, b1.lap) + multiply(a1.base.value, b0.lap));
    x2 += cplx(s.dot_first) * (gradient_dot(a0.base, b1.base) + gradient_dot(a1.base, b0.base));
    x2 += (kI * s.cross_first) *
          (gradient_cross(a0.base, b1.base) + gradient_cross(a1.base, b0.base));
    x2 += cplx(s.laplacian_sum) * (multiply(a0.lap, b0.base.value) + multiply(a0.base.value, b0.lap));
    x2 += cplx(s.laplacian_product) * multiply(a0.lap, b0.lap);
    x2 += cplx(s.grad_lap_dot_left) * gradient_dot(a0.lap_jet, b0.base);
    x2 += cplx(s.grad_lap_dot_right) * gradient_dot(a0.base, b0.lap_jet);
    x2 += cplx(s.dot) * gradient_dot(a0.base, b0.base);
    x2 += (kI * s.cross) * gradient_cross(a0.base, b0.base);
    x2 += (kI * s.cross_lap_left) * gradient_cross(a0.lap_jet, b0.base);
    x2 += (kI * s.cross_lap_right) * gradient_cross(a0.base, b0.lap_jet);
    SphereSymbol t2 = sh_analysis(x2, *grid, L);
    if (s.laplacian_of_dot != 0.0 || s.laplacian_of_cross != 0.0) {
      // Λ of a bilinear acts in coefficient space on its exact band-limited form.
      const int lf = la + lb;
      const auto g2 = cached_grid(2 * lf);
      const Jet pa = make_jet(F.term(0), *g2);
      const Jet pb = make_jet(G.term(0), *g2);
      const SphereSymbol dot = sh_analysis(gradient_dot(pa, pb), *g2, lf);
      const SphereSymbol cross = sh_analysis(gradient_cross(pa, pb), *g2, lf);
      SphereSymbol extra = cplx(s.laplacian_of_dot) * angular_square(dot) +
                           (kI * s.laplacian_of_cross) * angular_square(cross);
      t2 += extra.with_band_limit(L);
    }
    terms.push_back(t2);
  }
  (void)block;
  return SemiclassicalSymbol(std::move(terms));
}

// ============================================================================
// Calibration
// ============================================================================

/// One fitted ansatz coefficient.
struct CalibrationTerm {
  std::string term;
  double coefficient = 0.0;
  double std_error = 0.0;
  double residual_slope = 0.0;
};

/// Outcome of calibrate_order1.
struct CalibrationReport {
  ExpansionFamily family = ExpansionFamily::moyal;
  std::vector<int> dims;
  std::vector<CalibrationTerm> terms;             ///< product, laplacian, gradient_dot, poisson
  std::vector<std::vector<double>> per_dim;       ///< fitted (laplacian, gradient_dot) per d
  std::vector<double> residuals;                  ///< sup-norm fit residual per d
  double residual_slope = 0.0;
  double free_poisson = 0.0;                      ///< Poisson coefficient when fitted freely
  double free_poisson_std_error = 0.0;
  double identity_residual = 0.0;                 ///< |B1(1,1)| with the fitted table

  FirstOrderCoefficients first_order() const {
    FirstOrderCoefficients c;
    c.product = terms.at(0).coefficient;
    c.laplacian = terms.at(1).coefficient;
    c.gradient_dot = terms.at(2).coefficient;
    c.poisson = terms.at(3).coefficient;
    return c;
  }
};

/// A seeded corpus of real scalar symbol pairs with band limits in [1, max_band].
inline std::vector<std::pair<SphereSymbol, SphereSymbol>> random_corpus(std::uint64_t seed,
                                                                        int n_pairs = 10,
                                                                        int max_band = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> band(1, max_band);
  auto draw = [&](int L) {
    SphereSymbol f(L, 1);
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) f(l, m) = cplx(g(rng), g(rng)) / (1.0 + l);
    SphereSymbol h = 0.5 * (f + f.adjoint());
    return h;
  };
  std::vector<std::pair<SphereSymbol, SphereSymbol>> corpus;
  for (int i = 0; i < n_pairs; ++i) {
    const int lf = band(rng);
    const int lg = band(rng);
    SphereSymbol f = draw(lf);
    SphereSymbol gg = draw(lg);
    corpus.emplace_back(std::move(f), std::move(gg));
  }
  return corpus;
}

namespace detail {

/// Exact product for a family at the given kernel.
inline SphereSymbol exact_product(ExpansionFamily family, const SphereSymbol& f,
                                  const SphereSymbol& g, const SWKernel& kernel) {
  return family == ExpansionFamily::moyal ? star_exact(f, g, kernel) : berezin_exact(f, g, kernel);
}

/// Least squares with standard errors; returns (coefficients, std errors).
inline std::pair<RealVector, RealVector> least_squares(const RealMatrix& a, const RealVector& b) {
  const RealVector x = a.colPivHouseholderQr().solve(b);
  const int dof = std::max<int>(1, static_cast<int>(a.rows() - a.cols()));
  const double sigma2 = (a * x - b).squaredNorm() / dof;
  const RealMatrix cov = sigma2 * (a.transpose() * a).inverse();
  return {x, cov.diagonal().cwiseSqrt()};
}

/// Extrapolates y(d) = y_inf + a/d + b/d² + ... to d → ∞.
inline std::pair<double, double> extrapolate(const std::vector<double>& dims,
                                             const std::vector<double>& y) {
  const int n = static_cast<int>(dims.size());
  const int p = std::min(3, n - 1);
  RealMatrix a(n, p);
  RealVector b(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) a(i, c) = std::pow(1.0 / dims[i], c);
    b(i) = y[i];
  }
  if (n == p) {
    const RealVector x = a.colPivHouseholderQr().solve(b);
    return {x(0), 0.0};
  }
  auto [x, se] = least_squares(a, b);
  return {x(0), se(0)};
}

}  // namespace detail

/**
 * @brief Fits the symmetric order-1 coefficients against exact products.
 *
 * For each d the target d(f★g − fg) − i{f,g} is sampled on a grid for every
 * corpus pair and fitted over {Λf g + fΛg, ∇f·∇g} with real coefficients;
 * the fg coefficient is pinned to 0 by the identity-pair constraint. The
 * per-d coefficients are extrapolated polynomially in 1/d. A second fit with
 * the Poisson coefficient free checks its recovered value.
 *
 * Throws std::runtime_error if the residual slope is worse than −0.7.
 */
inline CalibrationReport calibrate_order1(
    ExpansionFamily family, const std::vector<int>& two_js,
    const std::vector<std::pair<SphereSymbol, SphereSymbol>>& corpus) {
  if (two_js.size() < 2) throw std::invalid_argument("calibration needs at least two spins");
  CalibrationReport report;
  report.family = family;
  int max_band = 0;
  for (const auto& [f, g] : corpus) max_band = std::max(max_band, f.band_limit() + g.band_limit());
  const auto grid = cached_grid(2 * max_band);

  struct PairFields {
    GridField fg, lap, dot, cross;
  };
  std::vector<PairFields> fields;
  for (const auto& [f, g] : corpus) {
    const auto jf = detail::star_jet(f, *grid, false);
    const auto jg = detail::star_jet(g, *grid, false);
    fields.push_back({multiply(jf.base.value, jg.base.value),
                      multiply(jf.lap, jg.base.value) + multiply(jf.base.value, jg.lap),
                      gradient_dot(jf.base, jg.base), gradient_cross(jf.base, jg.base)});
  }
  const int nodes = grid->size();
  const int rows = 2 * nodes * static_cast<int>(corpus.size());

  std::vector<double> dims, lap_c, dot_c, free_p;
  for (int two_j : two_js) {
    const SWKernel kernel(make_irrep(two_j));
    const double d = kernel.dim();
    RealMatrix a(rows, 2), a_free(rows, 3);
    RealVector b(rows), b_free(rows);
    int row = 0;
    for (std::size_t q = 0; q < corpus.size(); ++q) {
      const auto& [f, g] = corpus[q];
      const GridField exact = sh_synthesis(detail::exact_product(family, f, g, kernel), *grid);
      const PairFields& pf = fields[q];
      for (int p = 0; p < nodes; ++p) {
        const cplx deviation = d * (exact.values(0, p) - pf.fg.values(0, p));
        const cplx target = deviation - kI * pf.cross.values(0, p);
        const cplx cols[3] = {pf.lap.values(0, p), pf.dot.values(0, p), kI * pf.cross.values(0, p)};
        for (int part = 0; part < 2; ++part, ++row) {
          auto pick = [part](cplx z) { return part == 0 ? z.real() : z.imag(); };
          for (int c = 0; c < 2; ++c) a(row, c) = pick(cols[c]);
          for (int c = 0; c < 3; ++c) a_free(row, c) = pick(cols[c]);
          b(row) = pick(target);
          b_free(row) = pick(deviation);
        }
      }
    }
    const auto [x, se] = detail::least_squares(a, b);
    const auto [xf, sef] = detail::least_squares(a_free, b_free);
    dims.push_back(d);
    lap_c.push_back(x(0));
    dot_c.push_back(x(1));
    free_p.push_back(xf(2));
    report.per_dim.push_back({x(0), x(1)});
    report.residuals.push_back((a * x - b).cwiseAbs().maxCoeff());
    report.dims.push_back(static_cast<int>(d));
  }

  const auto [lap_inf, lap_se] = detail::extrapolate(dims, lap_c);
  const auto [dot_inf, dot_se] = detail::extrapolate(dims, dot_c);
  const auto [p_inf, p_se] = detail::extrapolate(dims, free_p);
  report.residual_slope = loglog_slope(dims, report.residuals).slope;
  report.free_poisson = p_inf;
  report.free_poisson_std_error = p_se;
  report.terms = {{"f*g", 0.0, 0.0, report.residual_slope},
                  {"lap(f)*g+f*lap(g)", lap_inf, lap_se, report.residual_slope},
                  {"grad(f).grad(g)", dot_inf, dot_se, report.residual_slope},
                  {"i*n.(grad(f)xgrad(g))", 1.0, 0.0, report.residual_slope}};

  const auto one = SphereSymbol::constant(1.0);
  report.identity_residual =
      max_abs(first_order_bilinear(one, one, report.first_order()).data());
  if (report.identity_residual > 1e-12)
    throw std::runtime_error("calibrated coefficients do not annihilate constants");
  if (report.residual_slope > -0.7)
    throw std::runtime_error("calibration residual slope " + std::to_string(report.residual_slope) +
                             " is worse than -0.7");
  return report;
}

/// Spins and corpus seed used for the default calibrated tables.
inline const std::vector<int>& default_calibration_spins() {
  static const std::vector<int> spins{10, 20, 40, 80};
  return spins;
}
inline constexpr std::uint64_t kDefaultCalibrationSeed = 2026;

/// Cached calibration report for a family with the default corpus.
inline const CalibrationReport& default_calibration(ExpansionFamily family) {
  static std::once_flag flags[2];
  static CalibrationReport reports[2];
  const int idx = family == ExpansionFamily::moyal ? 0 : 1;
  std::call_once(flags[idx], [&] {
    reports[idx] = calibrate_order1(family, default_calibration_spins(),
                                    random_corpus(kDefaultCalibrationSeed, 10, 4));
  });
  return reports[idx];
}

/// Calibrated order-1 table (no order-2 coefficients).
inline StarCoefficients calibrated_coefficients(ExpansionFamily family) {
  StarCoefficients c;
  c.family = family;
  c.set = CoefficientSet::calibrated;
  c.first = default_calibration(family).first_order();
  return c;
}

inline StarCoefficients coefficients(ExpansionFamily family, CoefficientSet set) {
  return set == CoefficientSet::printed ? printed_coefficients(family)
                                        : calibrated_coefficients(family);
}

/// Truncated Moyal (Stratonovich-Weyl) product.
inline SemiclassicalSymbol moyal_truncation(const SemiclassicalSymbol& F,
                                            const SemiclassicalSymbol& G, int k,
                                            CoefficientSet set, int band_cap = -1) {
  if (k < 0 || k > 2) throw std::invalid_argument("unsupported order " + std::to_string(k));
  return star_truncation(F, G, k, coefficients(ExpansionFamily::moyal, set), band_cap);
}

/// Truncated Berezin (covariant-symbol) product.
inline SemiclassicalSymbol berezin_truncation(const SemiclassicalSymbol& F,
                                              const SemiclassicalSymbol& G, int k,
                                              CoefficientSet set, int band_cap = -1) {
  if (k < 0 || k > 2) throw std::invalid_argument("unsupported order " + std::to_string(k));
  return star_truncation(F, G, k, coefficients(ExpansionFamily::berezin, set), band_cap);
}

/// Order-1 truncation of 1★1 minus 1 at dimension d (0 for a consistent table).
inline double unit_symbol_deviation(const StarCoefficients& c, double d) {
  const SemiclassicalSymbol one({SphereSymbol::constant(1.0)});
  const SphereSymbol t = star_truncation(one, one, 1, c).truncated(d, 1);
  return (t.evaluate(0.3, 0.2)(0, 0) - 1.0).real();
}

// ============================================================================
// Truncation-error sweeps
// ============================================================================

/// Corpus seed used for out-of-sample truncation sweeps.
inline constexpr std::uint64_t kDefaultEvaluationSeed = 7;

/// Sup-norm truncation errors of the exact product against orders 0 and 1.
struct TruncationSlopes {
  ExpansionFamily family = ExpansionFamily::moyal;
  CoefficientSet set = CoefficientSet::calibrated;
  std::uint64_t seed = kDefaultEvaluationSeed;
  SweepTable order0;
  SweepTable order1;
  /// |f★g − g★f − (2i/d){f,g}| (Moyal family only).
  std::optional<SweepTable> commutator;
};

/**
 * @brief Maximum over a seeded corpus of the truncation errors at each d_j.
 *
 * Errors are sup norms on a grid exact to 16, which samples every product of
 * corpus symbols (band limit at most 2·max_band + 2) without aliasing.
 */
inline TruncationSlopes truncation_slopes(ExpansionFamily family, CoefficientSet set,
                                          const std::vector<int>& two_js,
                                          std::uint64_t seed = kDefaultEvaluationSeed,
                                          int n_pairs = 10, int max_band = 4) {
  const StarCoefficients c = coefficients(family, set);
  const auto corpus = random_corpus(seed, n_pairs, max_band);
  const auto grid = cached_grid(std::max(16, 4 * max_band + 4));
  const bool moyal = family == ExpansionFamily::moyal;
  struct Errors {
    double e0 = 0.0, e1 = 0.0, ec = 0.0;
  };
  const auto rows = parallel_map(two_js.size(), [&](std::size_t i) {
    const SWKernel kernel(make_irrep(two_js[i]));
    const double d = kernel.dim();
    Errors e;
    for (const auto& [f, g] : corpus) {
      const SphereSymbol exact = detail::exact_product(family, f, g, kernel);
      const SemiclassicalSymbol t =
          star_truncation(SemiclassicalSymbol({f}), SemiclassicalSymbol({g}), 1, c);
      e.e0 = std::max(e.e0, sup_distance(exact, t.truncated(d, 0), *grid));
      e.e1 = std::max(e.e1, sup_distance(exact, t.truncated(d, 1), *grid));
      if (moyal) {
        const SphereSymbol comm = exact - star_exact(g, f, kernel);
        e.ec = std::max(e.ec, sup_distance(comm, (2.0 * kI / d) * poisson_bracket(f, g), *grid));
      }
    }
    return e;
  });
  TruncationSlopes out;
  out.family = family;
  out.set = set;
  out.seed = seed;
  SweepTable comm;
  for (std::size_t i = 0; i < two_js.size(); ++i) {
    for (SweepTable* t : {&out.order0, &out.order1, &comm}) t->dims.push_back(two_js[i] + 1);
    out.order0.values.push_back(rows[i].e0);
    out.order1.values.push_back(rows[i].e1);
    comm.values.push_back(rows[i].ec);
  }
  fit_sweep(out.order0);
  fit_sweep(out.order1);
  if (moyal) {
    fit_sweep(comm);
    out.commutator = std::move(comm);
  }
  return out;
}

}  // namespace sphere_sapt
