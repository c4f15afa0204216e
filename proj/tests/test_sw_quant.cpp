// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sphere_sapt/sw_quant.hpp"

using namespace sphere_sapt;

namespace {

SphereSymbol random_symbol(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SphereSymbol f(L, 1);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) f(l, m) = cplx(g(rng), g(rng));
  return f;
}

Matrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  return a;
}

Matrix pauli3() {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

}  // namespace

TEST(Kernel, PropertiesHoldForSampleSpins) {
  for (int two_j : {1, 2, 3, 5, 10}) {
    const SpinIrrep irrep = make_irrep(two_j);
    const SWKernel kernel = build_kernel(irrep, make_grid(2 * two_j + 2));
    const KernelAxioms r = kernel_axiom_residuals(kernel, 17, 20, 20, 4);
    EXPECT_LT(r.hermiticity, 1e-12) << two_j;
    EXPECT_LT(r.resolution, 1e-10) << two_j;
    EXPECT_LT(r.reproducing, 1e-10) << two_j;
    EXPECT_LT(r.trace_duality, 1e-10) << two_j;
    EXPECT_LT(r.covariance, 1e-10) << two_j;
  }
}

TEST(Kernel, RejectsCoarseGrid) {
  EXPECT_THROW(build_kernel(make_irrep(4), make_grid(6)), std::invalid_argument);
}

TEST(Kernel, TraceIsOne) {
  const SWKernel kernel(make_irrep(6));
  EXPECT_NEAR(std::abs(kernel.at(0.7, 2.1).trace() - 1.0), 0.0, 1e-12);
}

TEST(Quantize, ConstantGivesIdentity) {
  const SWKernel kernel(make_irrep(5));
  const Matrix q = quantize(SphereSymbol::constant(1.0), kernel);
  EXPECT_LT(max_abs(q - Matrix::Identity(6, 6)), 1e-12);
}

TEST(Quantize, HighDegreeProjectedOut) {
  const SWKernel kernel(make_irrep(3));
  for (int m = -4; m <= 4; ++m)
    EXPECT_EQ(max_abs(quantize(SphereSymbol::harmonic(4, m), kernel)), 0.0);
}

TEST(Quantize, CoordinateAtSpinHalf) {
  const SWKernel kernel(make_irrep(1));
  EXPECT_LT(max_abs(quantize(SphereSymbol::coordinate(2), kernel) - pauli3() / std::sqrt(3.0)),
            1e-12);
}

TEST(Quantize, HermitianSymbolGivesHermitianOperator) {
  std::mt19937_64 rng(5);
  const SWKernel kernel(make_irrep(4));
  SphereSymbol f = random_symbol(4, rng);
  f = 0.5 * (f + f.adjoint());
  const Matrix q = quantize(f, kernel);
  EXPECT_LT(max_abs(q - q.adjoint()), 1e-12);
}

TEST(Dequantize, IdentityAndSpinComponent) {
  for (int two_j : {1, 2, 5, 9}) {
    const SpinIrrep irrep = make_irrep(two_j);
    const SWKernel kernel(irrep);
    const Grid grid = make_grid(2 * two_j + 2);
    const SphereSymbol one = dequantize(Matrix::Identity(irrep.dim(), irrep.dim()), kernel);
    EXPECT_LT(sup_distance(one, SphereSymbol::constant(1.0), grid), 1e-12);
    const SphereSymbol s3 = dequantize(irrep.J3(), kernel);
    const SphereSymbol expected = std::sqrt(irrep.casimir()) * SphereSymbol::coordinate(2);
    EXPECT_LT(sup_distance(s3, expected, grid), 1e-12) << two_j;
  }
}

TEST(RoundTrip, BothDirections) {
  std::mt19937_64 rng(11);
  for (int two_j = 1; two_j <= 12; ++two_j) {
    const SpinIrrep irrep = make_irrep(two_j);
    const SWKernel kernel(irrep);
    const SphereSymbol f = random_symbol(two_j, rng);
    const SphereSymbol back = dequantize(quantize(f, kernel), kernel);
    EXPECT_LT(max_abs(back.data() - f.data()), 1e-10) << two_j;
    const Matrix a = random_matrix(irrep.dim(), rng);
    EXPECT_LT(max_abs(quantize(dequantize(a, kernel), kernel) - a), 1e-10) << two_j;
  }
}

TEST(RoundTrip, MatrixValuedBlocks) {
  std::mt19937_64 rng(3);
  const SpinIrrep irrep = make_irrep(4);
  const SWKernel kernel(irrep);
  const Matrix a = random_matrix(irrep.dim() * 3, rng);
  const SphereSymbol s = dequantize(a, kernel, 3);
  EXPECT_EQ(s.block(), 3);
  EXPECT_LT(max_abs(quantize(s, kernel) - a), 1e-10);
}

TEST(RoundTrip, GridAndCoefficientPathsAgree) {
  std::mt19937_64 rng(23);
  const SpinIrrep irrep = make_irrep(4);
  const SWKernel kernel = build_kernel(irrep, make_grid(10));
  const Matrix a = random_matrix(irrep.dim(), rng);
  const GridField on_grid = dequantize_on_grid(a, kernel);
  const GridField spectral = sh_synthesis(dequantize(a, kernel), kernel.grid());
  EXPECT_LT(max_abs(on_grid.values - spectral.values), 1e-11);
  EXPECT_LT(max_abs(quantize_on_grid(on_grid, kernel) - a), 1e-10);
}

TEST(LowerSymbol, IdentityAndSpinComponent) {
  for (int two_j : {1, 3, 6}) {
    const SpinIrrep irrep = make_irrep(two_j);
    const Grid grid = make_grid(2 * two_j + 2);
    const SphereSymbol one = lower_symbol(Matrix::Identity(irrep.dim(), irrep.dim()), irrep, grid);
    EXPECT_LT(sup_distance(one, SphereSymbol::constant(1.0), grid), 1e-12);
    const SphereSymbol s3 = lower_symbol(irrep.J3(), irrep, grid);
    EXPECT_LT(sup_distance(s3, irrep.j() * SphereSymbol::coordinate(2), grid), 1e-12) << two_j;
  }
}

TEST(LowerSymbol, SpectralPathMatchesSampledPath) {
  std::mt19937_64 rng(29);
  for (int two_j : {2, 5}) {
    const SpinIrrep irrep = make_irrep(two_j);
    const SWKernel kernel(irrep);
    const Grid grid = make_grid(2 * two_j + 2);
    const Matrix a = random_matrix(irrep.dim(), rng);
    const SphereSymbol sampled = lower_symbol(a, irrep, grid);
    const SphereSymbol spectral = lower_symbol_spectral(a, kernel);
    EXPECT_LT(max_abs(sampled.data() - spectral.data()), 1e-11) << two_j;
  }
}

TEST(LowerSymbol, InverseAndConditionNumber) {
  std::mt19937_64 rng(31);
  double previous = 1.0;
  for (int two_j = 1; two_j <= 8; ++two_j) {
    const SWKernel kernel(make_irrep(two_j));
    const Matrix a = random_matrix(two_j + 1, rng);
    const Matrix back = lower_symbol_inverse(lower_symbol_spectral(a, kernel), kernel);
    EXPECT_LT(max_abs(back - a), 1e-9) << two_j;
    const double cond = lower_symbol_condition(two_j);
    EXPECT_TRUE(std::isfinite(cond));
    EXPECT_GT(cond, previous);
    previous = cond;
  }
  EXPECT_NEAR(lower_symbol_condition(1), std::sqrt(3.0), 1e-12);
  EXPECT_THROW(lower_symbol_inverse(SphereSymbol::harmonic(3, 0), SWKernel(make_irrep(2))),
               std::invalid_argument);
}
