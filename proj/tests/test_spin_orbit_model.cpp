// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "sphere_sapt/spin_orbit_model.hpp"

using namespace sphere_sapt;

namespace {

std::vector<double> sorted_eigenvalues(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

double sup(const SphereSymbol& a, const SphereSymbol& b) {
  const int L = std::max(a.band_limit(), b.band_limit());
  return sup_distance(a, b, *cached_grid(2 * L + 2));
}

}  // namespace

TEST(Hamiltonian, DecoupledSpectrum) {
  const ModelParams p{6, 2, 0.0};
  const auto ev = sorted_eigenvalues(build_hamiltonian(p));
  ASSERT_EQ(ev.size(), 21u);
  for (int i = 0; i < 21; ++i) EXPECT_NEAR(ev[i], -1.0 + i / 7, 1e-12);
}

TEST(Hamiltonian, PureSpinOrbitMultiplets) {
  const ModelParams p{2, 1, 1.0};
  const Matrix h = build_hamiltonian(p);
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-12);
  const auto ev = sorted_eigenvalues(h);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(ev[i], -2.0 / 3.0, 1e-12);
  for (int i = 2; i < 6; ++i) EXPECT_NEAR(ev[i], 1.0 / 3.0, 1e-12);
}

TEST(Hamiltonian, InvalidParameters) {
  EXPECT_THROW(build_hamiltonian({1, 1, 0.2}), std::invalid_argument);
  EXPECT_THROW(build_hamiltonian({4, 1, 1.5}), std::invalid_argument);
}

TEST(Hamiltonian, KroneckerOrdering) {
  Matrix a(2, 2), b(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  b << 0.0, 1.0, 1.0, 0.0;
  const Matrix k = kron(a, b);
  EXPECT_EQ(k(0, 1), cplx(1.0));
  EXPECT_EQ(k(1, 2), cplx(2.0));
  EXPECT_EQ(k(3, 0), cplx(3.0));
  EXPECT_EQ(k(3, 3), cplx(0.0));
  EXPECT_EQ(k(2, 1), cplx(3.0));
}

TEST(Symbol, SeriesStructure) {
  const ModelParams p{9, 1, 0.3};
  const auto h = hamiltonian_symbol(p, 6);
  EXPECT_EQ(max_abs(h.term(1).data()), 0.0);
  EXPECT_EQ(max_abs(h.term(3).data()), 0.0);
  EXPECT_NEAR(sqrt_series_coefficient(1), -0.5, 1e-15);
  EXPECT_NEAR(sqrt_series_coefficient(2), -0.125, 1e-15);
  EXPECT_NEAR(sqrt_series_coefficient(3), -0.0625, 1e-15);
  const double d = p.dim_j();
  EXPECT_LT(sup(h.truncated(d), hamiltonian_symbol_exact(p)), 1e-8);
  const auto h0 = hamiltonian_symbol({9, 1, 0.0}, 4);
  EXPECT_LT(sup(h0.term(0), spin_component_symbol(1)), 1e-15);
  for (int i = 1; i <= 4; ++i) EXPECT_EQ(max_abs(h0.term(i).data()), 0.0);
}

TEST(Symbol, DequantizationMatchesClosedForm) {
  for (double lambda : {0.0, 0.2, 0.8, 1.0})
    for (int two_j = 3; two_j <= 11; ++two_j) {
      const ModelParams p{two_j, 1, lambda};
      const SWKernel kernel(*cached_irrep(two_j));
      const SphereSymbol s = dequantize(build_hamiltonian(p), kernel, p.dim_s());
      EXPECT_LT(sup(s, hamiltonian_symbol_exact(p)), 1e-10) << lambda << " " << two_j;
      const SphereSymbol lower = lower_symbol_spectral(build_hamiltonian(p), kernel, p.dim_s());
      EXPECT_LT(sup(lower, hamiltonian_lower_symbol(p)), 1e-10) << lambda << " " << two_j;
    }
}

TEST(Symbol, LowerSymbolBySampling) {
  const ModelParams p{5, 2, 0.4};
  const auto irrep = cached_irrep(5);
  const Grid grid = make_grid(12);
  const SphereSymbol lower = lower_symbol(build_hamiltonian(p), *irrep, grid, p.dim_s());
  EXPECT_LT(sup(lower, hamiltonian_lower_symbol(p)), 1e-10);
}

TEST(Bands, GapValuesAndDegeneracy) {
  EXPECT_NEAR(band_gap(kPi / 2, 0.5), std::sqrt(2.0) / 2.0, 1e-15);
  for (double lambda : {0.0, 0.05, 0.45, 0.5, 0.55, 0.95, 1.0})
    EXPECT_NEAR(band_gap(kPi, lambda), std::abs(1.0 - 2.0 * lambda), 1e-12);
  const BandSlice b = principal_bands(kPi, 0.3, 0.5, 3);
  EXPECT_TRUE(b.degenerate);
  for (double e : b.energies) EXPECT_NEAR(e, 0.0, 1e-12);
  EXPECT_FALSE(principal_bands(kPi, 0.3, 0.2, 3).degenerate);
  EXPECT_TRUE(principal_bands(kPi, 0.3, 0.8, 1).gauge_singular);
  EXPECT_FALSE(principal_bands(kPi, 0.3, 0.2, 1).gauge_singular);
}

TEST(Bands, GapProfileMinimum) {
  const GapProfile g = gap_profile(0.2, 1, 256);
  EXPECT_NEAR(g.min_gap, 0.6, 1e-12);
  EXPECT_NEAR(g.argmin, kPi, 1e-15);
  EXPECT_NEAR(gap_profile(0.5, 1, 64).min_gap, 0.0, 1e-15);
  for (std::size_t i = 0; i < g.thetas.size(); ++i) {
    const double c = std::cos(g.thetas[i]);
    EXPECT_NEAR(g.gaps[i] * g.gaps[i], 0.04 + 0.64 + 0.32 * c, 1e-12);
  }
  EXPECT_THROW(gap_profile(0.2, 0, 8), std::invalid_argument);
}

TEST(Bands, RotatedAngleNormalization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double t = kPi * u(rng), lambda = u(rng);
    const double n = band_gap(t, lambda);
    const double a = (1.0 - lambda) + lambda * std::cos(t), b = lambda * std::sin(t);
    EXPECT_NEAR(a * a + b * b, n * n, 1e-12);
    const double tl = rotated_polar_angle(t, lambda);
    EXPECT_NEAR(std::cos(tl), a / n, 1e-12);
    EXPECT_NEAR(std::sin(tl), b / n, 1e-12);
    const double h = 1e-6;
    const double fd = (rotated_polar_angle(t + h, lambda) - rotated_polar_angle(t - h, lambda)) / (2 * h);
    if (t > 1e-3 && t < kPi - 1e-3) EXPECT_NEAR(rotated_polar_derivative(t, lambda), fd, 1e-6);
  }
}

TEST(Bands, ReferenceUnitaryDiagonalizes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int two_s : {1, 2, 3}) {
    const auto s = cached_irrep(two_s);
    for (int k = 0; k < 200; ++k) {
      const double t = kPi * u(rng), ph = 2 * kPi * u(rng), lambda = 0.5 * u(rng);
      const Matrix u0 = reference_unitary(t, ph, lambda, two_s);
      const Matrix h0 = principal_symbol(t, ph, lambda, two_s);
      EXPECT_LT(max_abs(u0 * h0 * u0.adjoint() - band_gap(t, lambda) * s->J3()), 1e-10);
    }
  }
  EXPECT_LT(max_abs(reference_unitary(1.1, 0.4, 0.0, 2) - Matrix::Identity(3, 3)), 1e-14);
}

TEST(Bands, SpinHalfClosedForms) {
  const double t = 1.2, ph = 0.7, lambda = 0.8;
  const double tl = rotated_polar_angle(t, lambda);
  const double c = std::cos(tl / 2), s = std::sin(tl / 2);
  const cplx e = std::exp(kI * ph);
  Matrix u(2, 2), pp(2, 2), pm(2, 2);
  u << c, std::conj(e) * s, -e * s, c;
  pp << c * c, std::conj(e) * s * c, e * s * c, s * s;
  pm << s * s, -std::conj(e) * s * c, -e * s * c, c * c;
  const BandSlice b = principal_bands(t, ph, lambda, 1);
  EXPECT_LT(max_abs(b.u0 - u), 1e-12);
  EXPECT_LT(max_abs(b.projectors[0] - pp), 1e-12);
  EXPECT_LT(max_abs(b.projectors[1] - pm), 1e-12);
}

TEST(Bands, ProjectorInvariants) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int two_s : {1, 2, 3}) {
    for (int k = 0; k < 50; ++k) {
      const double t = kPi * u(rng), ph = 2 * kPi * u(rng);
      const double lambda = u(rng) < 0.5 ? 0.45 * u(rng) : 0.55 + 0.45 * u(rng);
      const BandSlice b = principal_bands(t, ph, lambda, two_s);
      const Matrix h0 = principal_symbol(t, ph, lambda, two_s);
      Matrix sum = Matrix::Zero(two_s + 1, two_s + 1);
      for (int a = 0; a <= two_s; ++a) {
        const Matrix& pa = b.projectors[a];
        EXPECT_LT(max_abs(pa * pa - pa), 1e-12);
        EXPECT_NEAR(pa.trace().real(), 1.0, 1e-12);
        EXPECT_LT(max_abs(h0 * pa - b.energies[a] * pa), 1e-10);
        sum += pa;
      }
      EXPECT_LT(max_abs(sum - Matrix::Identity(two_s + 1, two_s + 1)), 1e-12);
      const auto ev = sorted_eigenvalues(h0);
      for (int a = 0; a <= two_s; ++a)
        EXPECT_NEAR(ev[a], band_gap(t, lambda) * (a - 0.5 * two_s), 1e-12);
    }
  }
}

TEST(Bands, LabelIndexing) {
  EXPECT_EQ(band_index(1, 1), 0);
  EXPECT_EQ(band_index(1, -1), 1);
  EXPECT_EQ(band_index(3, -1), 2);
  EXPECT_DOUBLE_EQ(band_label(3, 2), -0.5);
  EXPECT_THROW(band_index(2, 1), std::invalid_argument);
}
