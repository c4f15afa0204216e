// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file sapt_engine.hpp
 * @brief Space adiabatic perturbation theory for the spin-orbit model at orders 0 and 1.
 *
 * Smooth band data (π0, u0, E) is represented by symbols band-limited at
 * L_s, chosen from the analyticity ellipse of N(θ, λ) so that the neglected
 * coefficients fall below 1e-18. All order-1 constructions use the bilinear
 * B1 of a selectable Moyal coefficient set.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sphere_sapt/berry_geometry.hpp"
#include "sphere_sapt/slope_fit.hpp"
#include "sphere_sapt/spin_orbit_model.hpp"
#include "sphere_sapt/star_product.hpp"
#include "sphere_sapt/sw_quant.hpp"

namespace sphere_sapt {

/// Smallest gap |1 − 2λ| accepted by the order-1 constructions.
inline constexpr double kMinimumGap = 0.1;

/// Throws std::invalid_argument with a gap diagnostic when |1 − 2λ| < kMinimumGap.
inline void require_gap(double lambda) {
  const double gap = std::abs(1.0 - 2.0 * lambda);
  if (gap < kMinimumGap)
    throw std::invalid_argument("spectral gap min N = " + std::to_string(gap) + " at lambda = " +
                                std::to_string(lambda) + " is below " +
                                std::to_string(kMinimumGap));
}

/// Band limit for the smooth band symbols at coupling λ.
inline int symbol_band_limit(double lambda) {
  if (lambda <= 0.0 || lambda >= 1.0) return 16;
  const double x0 = (lambda * lambda + (1.0 - lambda) * (1.0 - lambda)) / (2.0 * lambda * (1.0 - lambda));
  const double rho = x0 + std::sqrt(std::max(0.0, x0 * x0 - 1.0));
  if (rho <= 1.0) return 64;
  return std::clamp(static_cast<int>(std::ceil(18.0 / std::log10(rho))), 16, 64);
}

/// Samples fn(θ, φ) on a grid exact to 2L and analyzes at band L.
inline SphereSymbol sample_symbol(const std::function<Matrix(double, double)>& fn, int L, int block) {
  const auto grid = cached_grid(2 * L);
  GridField samples(grid->size(), block);
  for (int p = 0; p < grid->size(); ++p)
    samples.set(p, fn(grid->theta(grid->ring(p)), grid->phi(grid->column(p))));
  return sh_analysis(samples, *grid, L);
}

/// Band-limited symbols of the model's principal data for one band.
struct ModelSymbols {
  int two_s = 1;
  int band = 0;
  double lambda = 0.0;
  int band_limit = 16;
  SphereSymbol h0;          ///< principal symbol
  SphereSymbol u0;          ///< reference unitary
  SphereSymbol energy;      ///< E_m as a scalar symbol
  SphereSymbol projector;   ///< π_m
  Matrix reference;         ///< π_r = e_a e_a†
};

inline ModelSymbols model_symbols(int two_s, int band, double lambda) {
  if (band < 0 || band > two_s) throw std::invalid_argument("band index out of range");
  ModelSymbols s;
  s.two_s = two_s;
  s.band = band;
  s.lambda = lambda;
  s.band_limit = symbol_band_limit(lambda);
  const int ds = two_s + 1;
  s.reference = Matrix::Zero(ds, ds);
  s.reference(band, band) = 1.0;
  const double m = band_label(two_s, band);
  s.h0 = (1.0 - lambda) * spin_component_symbol(two_s) + lambda * spin_projection_symbol(two_s);
  if (lambda == 0.0) {
    s.u0 = SphereSymbol::constant(Matrix(Matrix::Identity(ds, ds)));
    s.energy = SphereSymbol::constant(m);
    s.projector = SphereSymbol::constant(s.reference);
    return s;
  }
  const int L = s.band_limit;
  s.u0 = sample_symbol([&](double t, double p) { return reference_unitary(t, p, lambda, two_s); },
                       L, ds);
  s.energy = sample_symbol(
      [&](double t, double) { return Matrix::Constant(1, 1, m * band_gap(t, lambda)); }, L, 1);
  s.projector = sample_symbol(
      [&](double t, double p) { return principal_bands(t, p, lambda, two_s).projectors[band]; }, L,
      ds);
  return s;
}

// ============================================================================
// Moyal projection
// ============================================================================

/// [π0, π1] with the residuals of the defining order-1 equations.
struct MoyalProjection {
  int two_s = 1;
  int band = 0;
  double lambda = 0.0;
  int order = 0;
  CoefficientSet set = CoefficientSet::calibrated;
  SemiclassicalSymbol terms;
  double idempotency_residual = 0.0;  ///< sup |π0π1 + π1π0 + B1(π0,π0) − π1|
  double commutation_residual = 0.0;  ///< sup |[H0,π1] + B1(H0,π0) − B1(π0,H0)|
};

/**
 * @brief Order ≤ 1 Moyal projection for band a.
 *
 * With P = π0(n), G = B1(π0, π0) and R = B1(H0, π0) − B1(π0, H0), the
 * order-1 term is π1 = −PGP + (1−P)G(1−P) + X where, in the eigenframe of
 * H0, X_bc = −R_bc/(E_b − E_c) for the blocks that couple band a to the
 * other bands.
 */
inline MoyalProjection moyal_projection(const ModelParams& p, int band, int order,
                                        CoefficientSet set) {
  p.validate();
  if (order < 0 || order > 1) throw std::invalid_argument("unsupported order " + std::to_string(order));
  require_gap(p.lambda);
  const ModelSymbols sym = model_symbols(p.two_s, band, p.lambda);
  MoyalProjection mp;
  mp.two_s = p.two_s;
  mp.band = band;
  mp.lambda = p.lambda;
  mp.order = order;
  mp.set = set;
  if (order == 0) {
    mp.terms = SemiclassicalSymbol({sym.projector});
    return mp;
  }
  const FirstOrderCoefficients c = coefficients(ExpansionFamily::moyal, set).first;
  const int L = sym.band_limit;
  const int ds = p.dim_s();
  const auto grid = cached_grid(4 * L);
  const auto jp = detail::star_jet(sym.projector, *grid, false);
  const auto jh = detail::star_jet(sym.h0, *grid, false);
  const GridField g = detail::first_order_field(jp, jp, c);
  const GridField r = detail::first_order_field(jh, jp, c) - detail::first_order_field(jp, jh, c);
  GridField pi1(grid->size(), ds);
  const Matrix id = Matrix::Identity(ds, ds);
  for (int q = 0; q < grid->size(); ++q) {
    const double t = grid->theta(grid->ring(q)), ph = grid->phi(grid->column(q));
    const BandSlice b = principal_bands(t, ph, p.lambda, p.two_s);
    const Matrix& pr = b.projectors[band];
    const Matrix gq = g.at(q);
    // Rotate R into the eigenframe, where band c is the basis vector e_c.
    const Matrix rr = b.u0 * r.at(q) * b.u0.adjoint();
    Matrix x = Matrix::Zero(ds, ds);
    for (int other = 0; other < ds; ++other) {
      if (other == band) continue;
      const double de = b.energies[band] - b.energies[other];
      x(band, other) = -rr(band, other) / de;
      x(other, band) = -rr(other, band) / (-de);
    }
    pi1.set(q, -pr * gq * pr + (id - pr) * gq * (id - pr) + b.u0.adjoint() * x * b.u0);
    const Matrix v = pi1.at(q);
    const Matrix h0 = principal_symbol(t, ph, p.lambda, p.two_s);
    mp.idempotency_residual =
        std::max(mp.idempotency_residual, max_abs(Matrix(pr * v + v * pr + gq - v)));
    mp.commutation_residual =
        std::max(mp.commutation_residual, max_abs(Matrix(h0 * v - v * h0 + r.at(q))));
  }
  mp.terms = SemiclassicalSymbol({sym.projector, sh_analysis(pi1, *grid, L)});
  return mp;
}

/// quantize(π0 + d⁻¹π1) on H_j ⊗ H_s.
inline Matrix quantize_projection(const MoyalProjection& mp, const SWKernel& kernel) {
  return quantize(mp.terms.truncated(kernel.dim()), kernel);
}

/// ‖[Ĥ, Π̂]‖₂ over a d_j sweep.
inline SweepTable almost_invariance_norms(int two_s, double lambda, const std::vector<int>& two_js,
                                          int band, int order, CoefficientSet set) {
  const MoyalProjection mp = moyal_projection({two_js.empty() ? two_s + 1 : two_js.front(), two_s,
                                               lambda}, band, order, set);
  return run_sweep(two_js, [&](int two_j) {
    const ModelParams p{two_j, two_s, lambda};
    const Matrix h = build_hamiltonian(p);
    const Matrix pi = quantize_projection(mp, SWKernel(*cached_irrep(two_j)));
    return spectral_norm(Matrix(h * pi - pi * h));
  });
}

// ============================================================================
// Exact band projections
// ============================================================================

/// One cluster of exact eigenvalues.
struct BandCluster {
  double lower = 0.0;
  double upper = 0.0;
  int rank = 0;
  std::vector<double> eigenvalues;
  Matrix projector;
};

/// Exact spectral clusters ordered from the top band (a = 0) down.
struct ExactBands {
  std::vector<BandCluster> clusters;
  double gap_ratio = std::numeric_limits<double>::infinity();
  int reference_rank = 0;
};

/**
 * @brief Clusters the spectrum of Ĥ into d_s groups.
 *
 * Without explicit windows the sorted spectrum is split at its d_s − 1
 * largest gaps; if the smallest chosen gap is less than 3 times the largest
 * remaining gap the split is ambiguous and std::runtime_error asks for
 * explicit windows. Windows are closed energy intervals, top band first.
 */
inline ExactBands exact_band_projection(const ModelParams& p,
                                        const std::vector<std::pair<double, double>>& windows = {}) {
  p.validate();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(build_hamiltonian(p));
  const RealVector ev = es.eigenvalues();
  const Matrix& vec = es.eigenvectors();
  const int n = static_cast<int>(ev.size());
  const int ds = p.dim_s();
  ExactBands out;
  out.reference_rank = p.dim_j();
  std::vector<std::pair<int, int>> ranges;  // [begin, end) in ascending order
  if (windows.empty()) {
    std::vector<std::pair<double, int>> gaps;
    for (int i = 0; i + 1 < n; ++i) gaps.push_back({ev(i + 1) - ev(i), i + 1});
    std::sort(gaps.begin(), gaps.end(), std::greater<>());
    std::vector<int> cuts;
    for (int k = 0; k < ds - 1; ++k) cuts.push_back(gaps[static_cast<std::size_t>(k)].second);
    if (ds - 1 < static_cast<int>(gaps.size()) && ds > 1) {
      const double chosen = gaps[static_cast<std::size_t>(ds - 2)].first;
      const double rest = gaps[static_cast<std::size_t>(ds - 1)].first;
      out.gap_ratio = rest > 0.0 ? chosen / rest : std::numeric_limits<double>::infinity();
      if (out.gap_ratio < 3.0)
        throw std::runtime_error("ambiguous band clustering (gap ratio " +
                                 std::to_string(out.gap_ratio) + " < 3); give explicit windows");
    }
    std::sort(cuts.begin(), cuts.end());
    int begin = 0;
    for (int c : cuts) {
      ranges.push_back({begin, c});
      begin = c;
    }
    ranges.push_back({begin, n});
    std::reverse(ranges.begin(), ranges.end());
  } else {
    for (const auto& [lo, hi] : windows) {
      int begin = n, end = 0;
      for (int i = 0; i < n; ++i)
        if (ev(i) >= lo && ev(i) <= hi) {
          begin = std::min(begin, i);
          end = std::max(end, i + 1);
        }
      if (begin >= end) begin = end = 0;
      ranges.push_back({begin, end});
    }
  }
  for (const auto& [b, e] : ranges) {
    BandCluster c;
    c.rank = e - b;
    if (c.rank > 0) {
      c.lower = ev(b);
      c.upper = ev(e - 1);
    }
    for (int i = b; i < e; ++i) c.eigenvalues.push_back(ev(i));
    const Matrix v = vec.middleCols(b, e - b);
    c.projector = v * v.adjoint();
    out.clusters.push_back(std::move(c));
  }
  return out;
}

// ============================================================================
// Effective Hamiltonian
// ============================================================================

enum class EffectivePath { closed_form, star_machinery };

inline std::string to_string(EffectivePath p) {
  return p == EffectivePath::closed_form ? "closed_form" : "star_machinery";
}

/// [h0, h1] on the reference block; h_k = (scalar) · π_r.
struct EffectiveSymbol {
  int two_s = 1;
  int band = 0;
  double lambda = 0.0;
  EffectivePath path = EffectivePath::star_machinery;
  CoefficientSet set = CoefficientSet::calibrated;
  SemiclassicalSymbol terms;   ///< matrix-valued, block d_s
  SemiclassicalSymbol scalar;  ///< the (a, a) entries as scalar symbols
  Matrix reference;
};

/// Value, ∂θ, ∂φ and Λ of a matrix function of (θ, φ) at one point.
struct PointJet {
  Matrix value, d_theta, d_phi, lap;
};

namespace detail {

inline PointJet reference_unitary_jet(double theta, double phi, double lambda, int two_s) {
  const auto s = cached_irrep(two_s);
  const Matrix& s2 = s->J2();
  const Matrix& s3 = s->J3();
  const double tl = rotated_polar_angle(theta, lambda);
  const double d1 = rotated_polar_derivative(theta, lambda);
  const double n2 = std::pow(band_gap(theta, lambda), 2);
  const double b = 2.0 * lambda * (1.0 - lambda);
  const double g = lambda * (lambda + (1.0 - lambda) * std::cos(theta));
  const double d2 = std::sin(theta) * (-lambda * (1.0 - lambda) * n2 + b * g) / (n2 * n2);
  const int ds = two_s + 1;
  Vector left(ds), right(ds);
  for (int k = 0; k < ds; ++k) {
    const double mk = band_label(two_s, k);
    left(k) = std::exp(-kI * (phi * mk));
    right(k) = std::exp(kI * (phi * mk));
  }
  const Matrix rot = s->exp_i_J2(tl);
  auto wrap = [&](const Matrix& core) { return Matrix(left.asDiagonal() * core * right.asDiagonal()); };
  PointJet j;
  j.value = wrap(rot);
  j.d_theta = wrap(d1 * (kI * s2 * rot));
  const Matrix d_tt = wrap(d2 * (kI * s2 * rot) - d1 * d1 * (s2 * s2 * rot));
  j.d_phi = -kI * s3 * j.value + kI * j.value * s3;
  const Matrix d_pp = -s3 * s3 * j.value + 2.0 * s3 * j.value * s3 - j.value * s3 * s3;
  const double st = std::sin(theta);
  j.lap = d_tt + (std::cos(theta) / st) * j.d_theta + d_pp / (st * st);
  return j;
}

inline PointJet principal_symbol_jet(double theta, double phi, double lambda, int two_s) {
  const auto s = cached_irrep(two_s);
  const Vec3 et(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta));
  const Vec3 dp(-std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi), 0.0);
  PointJet j;
  j.value = principal_symbol(theta, phi, lambda, two_s);
  j.d_theta = lambda * s->dot(et);
  j.d_phi = lambda * s->dot(dp);
  j.lap = -2.0 * lambda * s->dot(unit_vector(theta, phi));
  return j;
}

inline PointJet band_energy_jet(double theta, double lambda, double m, int ds) {
  const double n = band_gap(theta, lambda);
  const double b = 2.0 * lambda * (1.0 - lambda);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double dn = -b * st / (2.0 * n);
  const double ddn = -b * ct / (2.0 * n) - b * b * st * st / (4.0 * n * n * n);
  const Matrix id = Matrix::Identity(ds, ds);
  PointJet j;
  j.value = (m * n) * id;
  j.d_theta = (m * dn) * id;
  j.d_phi = Matrix::Zero(ds, ds);
  j.lap = (m * (ddn + ct / st * dn)) * id;
  return j;
}

inline Matrix bilinear_at(const PointJet& a, const PointJet& b, const FirstOrderCoefficients& c,
                          double theta) {
  const double st = std::sin(theta);
  Matrix out = c.product * a.value * b.value;
  out += c.laplacian * (a.lap * b.value + a.value * b.lap);
  out += c.gradient_dot * (a.d_theta * b.d_theta + a.d_phi * b.d_phi / (st * st));
  out += (kI * c.poisson) * (a.d_theta * b.d_phi - a.d_phi * b.d_theta) / st;
  return out;
}

}  // namespace detail

/// Result of a pointwise first-order evaluation.
struct PointwiseFirstOrder {
  double value = 0.0;
  bool chart_restricted = false;  ///< λ > ½: valid only away from θ = π
};

/**
 * @brief h1 at one point from exact derivatives of u0, H0 and E.
 *
 * h1 = <a| [B1(u0, H0) − B1(E, u0)] u0† |a>, where the fg term of B1 cancels
 * identically. For λ > ½ the result is flagged as chart-restricted and
 * θ = π is rejected.
 */
inline PointwiseFirstOrder effective_first_order_at(int two_s, int band, double lambda,
                                                    double theta, double phi,
                                                    const FirstOrderCoefficients& c) {
  PointwiseFirstOrder r;
  r.chart_restricted = lambda > 0.5;
  if (r.chart_restricted && std::abs(theta - kPi) < 1e-9)
    throw std::invalid_argument("reference unitary is singular at theta = pi for lambda > 1/2");
  FirstOrderCoefficients cc = c;
  cc.product = 0.0;
  const auto u = detail::reference_unitary_jet(theta, phi, lambda, two_s);
  const auto h = detail::principal_symbol_jet(theta, phi, lambda, two_s);
  const auto e = detail::band_energy_jet(theta, lambda, band_label(two_s, band), two_s + 1);
  const Matrix x = (detail::bilinear_at(u, h, cc, theta) - detail::bilinear_at(e, u, cc, theta)) *
                   u.value.adjoint();
  r.value = x(band, band).real();
  return r;
}

/**
 * @brief The first-order Berry-form expression for s = ½ at one point.
 *
 * (1/sinθ)(2 ∂θE A_φ + 2 E F_θφ) + (1/sin²θ) E ((2E/λ F_θφ)² ∓ A_φ), reported
 * for comparison with the two computed paths.
 */
inline double berry_form_first_order(int band, double lambda, double theta) {
  const double m = band_label(1, band);
  const double st = std::sin(theta);
  const double n = band_gap(theta, lambda);
  const double e = m * n;
  const double de = -m * lambda * (1.0 - lambda) * st / n;
  const double a = berry_connection_phi(theta, lambda, m);
  const double f = berry_curvature(theta, lambda, m);
  const double sign = m > 0 ? 1.0 : -1.0;
  const double q = 2.0 * e / lambda * f;
  return (2.0 * de * a + 2.0 * e * f) / st + e * (q * q - sign * a) / (st * st);
}

/**
 * @brief Effective symbol [h0, h1] (order ≤ 1) restricted to the reference block.
 *
 * Both paths return symbols band-limited at L_s. The closed_form path samples
 * effective_first_order_at; star_machinery applies B1 to the band-limited
 * symbols of u0, H0 and E. Throws std::invalid_argument for λ > ½ (no global
 * reference unitary) and for gaps below kMinimumGap.
 */
inline EffectiveSymbol effective_hamiltonian(const ModelParams& p, int band, int order,
                                             EffectivePath path, CoefficientSet set) {
  p.validate();
  if (order < 0 || order > 1) throw std::invalid_argument("unsupported order " + std::to_string(order));
  if (p.lambda > 0.5)
    throw std::invalid_argument("no global reference unitary for lambda > 1/2; use the chart-restricted "
                                "pointwise evaluation");
  require_gap(p.lambda);
  const ModelSymbols sym = model_symbols(p.two_s, band, p.lambda);
  const int ds = p.dim_s();
  const int L = sym.band_limit;
  EffectiveSymbol out;
  out.two_s = p.two_s;
  out.band = band;
  out.lambda = p.lambda;
  out.path = path;
  out.set = set;
  out.reference = sym.reference;
  std::vector<SphereSymbol> scalar{sym.energy};
  if (order == 1) {
    FirstOrderCoefficients c = coefficients(ExpansionFamily::moyal, set).first;
    c.product = 0.0;
    if (p.lambda == 0.0) {
      scalar.push_back(SphereSymbol(0, 1));
    } else if (path == EffectivePath::closed_form) {
      scalar.push_back(sample_symbol(
          [&](double t, double ph) {
            return Matrix::Constant(1, 1, effective_first_order_at(p.two_s, band, p.lambda, t, ph, c).value);
          },
          L, 1));
    } else {
      const auto grid = cached_grid(2 * L);
      const SphereSymbol e = scalar_times(sym.energy, Matrix::Identity(ds, ds));
      const auto ju = detail::star_jet(sym.u0, *grid, false);
      const auto jh = detail::star_jet(sym.h0, *grid, false);
      const auto je = detail::star_jet(e, *grid, false);
      const GridField x =
          detail::first_order_field(ju, jh, c) - detail::first_order_field(je, ju, c);
      GridField h1(grid->size(), 1);
      for (int q = 0; q < grid->size(); ++q) {
        const Matrix v = x.at(q) * ju.base.value.at(q).adjoint();
        h1.values(0, q) = v(band, band);
      }
      scalar.push_back(sh_analysis(h1, *grid, L));
    }
  }
  std::vector<SphereSymbol> terms;
  for (const auto& s : scalar) terms.push_back(scalar_times(s, sym.reference));
  out.scalar = SemiclassicalSymbol(std::move(scalar));
  out.terms = SemiclassicalSymbol(std::move(terms));
  return out;
}

// ============================================================================
// Spectral comparison
// ============================================================================

/// Symmetric Hausdorff distance between two finite sets of reals.
inline double hausdorff_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  auto one_way = [](const std::vector<double>& x, const std::vector<double>& y) {
    double worst = 0.0;
    for (double v : x) {
      double best = std::numeric_limits<double>::infinity();
      for (double w : y) best = std::min(best, std::abs(v - w));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

/// Eigenvalues of quantize(h0 + d⁻¹h1) for the scalar effective symbol.
inline std::vector<double> effective_spectrum(const EffectiveSymbol& h, const SWKernel& kernel) {
  const Matrix q = quantize(h.scalar.truncated(kernel.dim()), kernel);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.adjoint()));
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

/// Hausdorff distance between exact cluster eigenvalues and the effective spectrum.
inline SweepTable band_spectrum_compare(int two_s, double lambda, const std::vector<int>& two_js,
                                        int band, int order, CoefficientSet set) {
  if (lambda >= 0.5) throw std::invalid_argument("band spectrum comparison needs lambda < 1/2");
  const EffectiveSymbol h = effective_hamiltonian({two_js.empty() ? two_s + 1 : two_js.front(),
                                                   two_s, lambda},
                                                  band, order, EffectivePath::star_machinery, set);
  return run_sweep(two_js, [&](int two_j) {
    const ExactBands exact = exact_band_projection({two_j, two_s, lambda});
    const auto eff = effective_spectrum(h, SWKernel(*cached_irrep(two_j)));
    return hausdorff_distance(exact.clusters[static_cast<std::size_t>(band)].eigenvalues, eff);
  });
}

// ============================================================================
// Classical flow and Egorov comparison
// ============================================================================

/// A scalar energy on S² with its tangential gradient.
struct EnergyFunction {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
};

/// E_m(n, λ) = m N(n, λ).
inline EnergyFunction band_energy(double lambda, double m) {
  EnergyFunction e;
  e.value = [=](const Vec3& n) {
    return m * std::sqrt(lambda * lambda + (1 - lambda) * (1 - lambda) + 2 * lambda * (1 - lambda) * n(2));
  };
  e.gradient = [=](const Vec3& n) {
    const double nn =
        std::sqrt(lambda * lambda + (1 - lambda) * (1 - lambda) + 2 * lambda * (1 - lambda) * n(2));
    const Vec3 e3(0.0, 0.0, 1.0);
    return Vec3((m * lambda * (1 - lambda) / nn) * (e3 - n(2) * n));
  };
  return e;
}

/// Trajectory of ṅ = n × ∇E.
struct FlowState {
  std::vector<double> times;
  std::vector<Vec3> trajectory;
  std::vector<double> energies;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;

  const Vec3& final_point() const { return trajectory.back(); }
};

/**
 * @brief Fixed-step RK4 for ṅ = n × ∇E with renormalization after each step.
 *
 * Every record_every steps the state is stored. Throws std::runtime_error if
 * ||n| − 1| exceeds 1e-10 before renormalization or |E − E0| exceeds 1e-8.
 */
inline FlowState classical_flow(const EnergyFunction& energy, const Vec3& n0, double t_final,
                                double dt = 1e-3, int record_every = 1) {
  if (std::abs(n0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial point must be a unit vector");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  auto rhs = [&](const Vec3& n) { return Vec3(n.cross(energy.gradient(n))); };
  FlowState s;
  Vec3 n = n0;
  const double e0 = energy.value(n0);
  const int steps = static_cast<int>(std::ceil(t_final / dt - 1e-9));
  const double h = steps > 0 ? t_final / steps : 0.0;
  s.times.push_back(0.0);
  s.trajectory.push_back(n);
  s.energies.push_back(e0);
  for (int k = 1; k <= steps; ++k) {
    const Vec3 k1 = rhs(n);
    const Vec3 k2 = rhs(n + 0.5 * h * k1);
    const Vec3 k3 = rhs(n + 0.5 * h * k2);
    const Vec3 k4 = rhs(n + h * k3);
    n += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s.max_norm_drift = std::max(s.max_norm_drift, std::abs(n.norm() - 1.0));
    if (s.max_norm_drift > 1e-10) throw std::runtime_error("flow step rejected: norm drift");
    n.normalize();
    const double e = energy.value(n);
    s.max_energy_drift = std::max(s.max_energy_drift, std::abs(e - e0));
    if (s.max_energy_drift > 1e-8) throw std::runtime_error("flow step rejected: energy drift");
    if (k % record_every == 0 || k == steps) {
      s.times.push_back(k * h);
      s.trajectory.push_back(n);
      s.energies.push_back(e);
    }
  }
  return s;
}

/// Sign σ in the quantum time s = σ (d_j/2) t that matches the classical flow.
inline constexpr double kEgorovTimeSign = -1.0;

/// Egorov sweep with flow diagnostics.
struct EgorovTable {
  SweepTable errors;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;
};

/**
 * @brief sup_n |dequantize(e^{iĥs} ô e^{−iĥs}) − o∘Φ_t| at t = T over a d_j sweep.
 *
 * ĥ quantizes the order-1 effective symbol of the band, s = σ (d_j/2) T and
 * the supremum is taken over the nodes of a grid exact to 2·max(2j) + 2.
 */
inline EgorovTable egorov_error(double lambda, int band, const SphereSymbol& observable,
                                const std::vector<int>& two_js, double t_final,
                                CoefficientSet set = CoefficientSet::calibrated, double dt = 1e-3) {
  if (lambda >= 0.5) throw std::invalid_argument("Egorov comparison needs lambda < 1/2");
  const int two_s = 1;
  const EffectiveSymbol h = effective_hamiltonian({two_js.empty() ? 2 : two_js.front(), two_s, lambda},
                                                  band, 1, EffectivePath::star_machinery, set);
  const EnergyFunction energy = band_energy(lambda, band_label(two_s, band));
  int max_two_j = 0;
  for (int tj : two_js) max_two_j = std::max(max_two_j, tj);
  const auto grid = cached_grid(std::max(2 * max_two_j + 2, 2 * observable.band_limit() + 2));
  EgorovTable out;
  const auto flows = parallel_map(static_cast<std::size_t>(grid->size()), [&](std::size_t q) {
    return classical_flow(energy, grid->point(static_cast<int>(q)), t_final, dt, 1000000);
  });
  std::vector<double> classical;
  classical.reserve(flows.size());
  for (const FlowState& f : flows) {
    out.max_norm_drift = std::max(out.max_norm_drift, f.max_norm_drift);
    out.max_energy_drift = std::max(out.max_energy_drift, f.max_energy_drift);
    classical.push_back(observable.evaluate(f.final_point())(0, 0).real());
  }
  out.errors = run_sweep(two_js, [&](int two_j) {
    const SWKernel kernel(*cached_irrep(two_j));
    const double d = kernel.dim();
    Matrix hq = quantize(h.scalar.truncated(d), kernel);
    hq = 0.5 * (hq + hq.adjoint());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(hq);
    const double s = kEgorovTimeSign * 0.5 * d * t_final;
    const Vector phase = (kI * s * es.eigenvalues().cast<cplx>()).array().exp();
    const Matrix u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    const Matrix evolved = u * quantize(observable, kernel) * u.adjoint();
    const GridField sym = sh_synthesis(dequantize(evolved, kernel), *grid);
    double worst = 0.0;
    for (int q = 0; q < grid->size(); ++q)
      worst = std::max(worst, std::abs(sym.values(0, q) - classical[static_cast<std::size_t>(q)]));
    return worst;
  });
  return out;
}

}  // namespace sphere_sapt
