// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sphere_sapt/star_product.hpp"

using namespace sphere_sapt;

namespace {

SphereSymbol random_real_symbol(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SphereSymbol f(L, 1);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) f(l, m) = cplx(g(rng), g(rng));
  return 0.5 * (f + f.adjoint());
}

SphereSymbol n(int a) { return SphereSymbol::coordinate(a); }

double sup(const SphereSymbol& a, const SphereSymbol& b) {
  const int L = std::max(a.band_limit(), b.band_limit());
  return sup_distance(a, b, *cached_grid(2 * L + 2));
}

}  // namespace

TEST(StarExact, UnitAndSpinHalfSpotValue) {
  std::mt19937_64 rng(1);
  const SWKernel kernel(make_irrep(6));
  const SphereSymbol g = random_real_symbol(5, rng);
  EXPECT_LT(sup(star_exact(SphereSymbol::constant(1.0), g, kernel), g), 1e-11);
  const SphereSymbol sq = star_exact(n(2), n(2), SWKernel(make_irrep(1)));
  EXPECT_LT(sup(sq, SphereSymbol::constant(1.0 / 3.0)), 1e-12);
}

TEST(StarExact, ConjugationAndAssociativity) {
  std::mt19937_64 rng(2);
  const SWKernel kernel(make_irrep(7));
  SphereSymbol f(4, 1), g(4, 1), h(3, 1);
  std::normal_distribution<double> gauss;
  for (auto* s : {&f, &g, &h})
    for (int l = 0; l <= s->band_limit(); ++l)
      for (int m = -l; m <= l; ++m) (*s)(l, m) = cplx(gauss(rng), gauss(rng));
  const SphereSymbol lhs = star_exact(f, g, kernel).adjoint();
  const SphereSymbol rhs = star_exact(g.adjoint(), f.adjoint(), kernel);
  EXPECT_LT(max_abs(lhs.data() - rhs.data()), 1e-11);
  const SphereSymbol left = star_exact(star_exact(f, g, kernel), h, kernel);
  const SphereSymbol right = star_exact(f, star_exact(g, h, kernel), kernel);
  EXPECT_LT(max_abs(left.data() - right.data()), 1e-9);
}

TEST(StarExact, SpinComponentCommutatorClosedForm) {
  for (int two_j : {3, 10, 30}) {
    const SpinIrrep irrep = make_irrep(two_j);
    const SWKernel kernel(irrep);
    const SphereSymbol comm = star_exact(n(0), n(1), kernel) - star_exact(n(1), n(0), kernel);
    EXPECT_LT(sup(comm, (kI / std::sqrt(irrep.casimir())) * n(2)), 1e-12) << two_j;
  }
}

TEST(StarExact, CommutatorRemainderStartsAtThirdOrder) {
  for (int two_j : {20, 40, 80}) {
    const double d = two_j + 1.0;
    const SWKernel kernel(make_irrep(two_j));
    const SphereSymbol comm = star_exact(n(0), n(1), kernel) - star_exact(n(1), n(0), kernel);
    const double remainder = sup(comm, (2.0 * kI / d) * poisson_bracket(n(0), n(1)));
    EXPECT_LT(d * d * remainder, 1.1 / d) << two_j;
    EXPECT_NEAR(d * d * d * remainder, 1.0, 0.01) << two_j;
  }
}

TEST(Truncation, OrderZeroIsPointwiseProduct) {
  std::mt19937_64 rng(3);
  const SphereSymbol f = random_real_symbol(3, rng);
  const SphereSymbol g = random_real_symbol(2, rng);
  for (auto set : {CoefficientSet::printed, CoefficientSet::calibrated}) {
    const auto t = moyal_truncation(SemiclassicalSymbol({f}), SemiclassicalSymbol({g}), 0, set);
    EXPECT_EQ(t.order(), 0);
    EXPECT_LT(sup(t.term(0), pointwise_product(f, g)), 1e-12);
    const auto b = berezin_truncation(SemiclassicalSymbol({f}), SemiclassicalSymbol({g}), 0, set);
    EXPECT_LT(sup(b.term(0), pointwise_product(f, g)), 1e-12);
  }
}

TEST(Truncation, AntisymmetrizedFirstOrderIsPoissonTerm) {
  for (auto family : {ExpansionFamily::moyal, ExpansionFamily::berezin}) {
    const auto c = printed_coefficients(family);
    const SemiclassicalSymbol a({n(0)}), b({n(1)});
    const SphereSymbol comm =
        star_truncation(a, b, 1, c).term(1) - star_truncation(b, a, 1, c).term(1);
    EXPECT_LT(sup(comm, (2.0 * kI) * n(2)), 1e-12) << to_string(family);
  }
}

TEST(Truncation, PrintedUnitAnomaly) {
  const SemiclassicalSymbol one({SphereSymbol::constant(1.0)});
  for (auto family : {ExpansionFamily::moyal, ExpansionFamily::berezin}) {
    const auto t = star_truncation(one, one, 1, printed_coefficients(family));
    EXPECT_LT(sup(t.term(1), SphereSymbol::constant(-0.5)), 1e-12);
    for (double d : {11.0, 81.0})
      EXPECT_NEAR(unit_symbol_deviation(printed_coefficients(family), d), -0.5 / d, 1e-12);
  }
  const SWKernel kernel(make_irrep(4));
  EXPECT_LT(sup(star_exact(one.term(0), one.term(0), kernel), one.term(0)), 1e-12);
  EXPECT_LT(sup(berezin_exact(one.term(0), one.term(0), kernel), one.term(0)), 1e-12);
}

TEST(Truncation, PrintedSecondOrderOnCoordinate) {
  const SemiclassicalSymbol a({n(2)});
  const SphereSymbol x2 = moyal_truncation(a, a, 2, CoefficientSet::printed).term(2);
  const SphereSymbol n3sq = pointwise_product(n(2), n(2));
  const SphereSymbol expected = SphereSymbol::constant(5.0) - 6.0 * n3sq;
  EXPECT_LT(sup(x2, expected), 1e-12);
}

TEST(Truncation, UnsupportedOrders) {
  const SemiclassicalSymbol a({n(0)});
  EXPECT_THROW(moyal_truncation(a, a, 3, CoefficientSet::printed), std::invalid_argument);
  EXPECT_THROW(berezin_truncation(a, a, -1, CoefficientSet::printed), std::invalid_argument);
  EXPECT_THROW(moyal_truncation(a, a, 2, CoefficientSet::calibrated), std::invalid_argument);
  EXPECT_NO_THROW(moyal_truncation(a, a, 2, CoefficientSet::printed));
}

TEST(Truncation, MatrixFactorsKeepWrittenOrder) {
  Matrix p(2, 2), q(2, 2);
  p << 0.0, 1.0, 0.0, 0.0;
  q << 0.0, 0.0, 1.0, 0.0;
  const SphereSymbol f = scalar_times(n(2), p);
  const SphereSymbol g = SphereSymbol::constant(q);
  const auto t = moyal_truncation(SemiclassicalSymbol({f}), SemiclassicalSymbol({g}), 1,
                                  CoefficientSet::printed);
  const double n3 = std::cos(0.4);
  EXPECT_LT(max_abs(t.term(0).evaluate(0.4, 0.3) - n3 * p * q), 1e-12);
  EXPECT_LT(max_abs(t.term(1).evaluate(0.4, 0.3) - (-0.5 - 2.0) * n3 * p * q), 1e-12);
}

TEST(SemiclassicalSymbol, TruncationSumsPowers) {
  const SemiclassicalSymbol s({SphereSymbol::constant(1.0), n(2), SphereSymbol::constant(4.0)});
  const double d = 5.0;
  const Matrix v = s.truncated(d, 1).evaluate(0.0, 0.0);
  EXPECT_NEAR(v(0, 0).real(), 1.0 + 1.0 / d, 1e-12);
  EXPECT_NEAR(s.truncated(d).evaluate(0.0, 0.0)(0, 0).real(), 1.0 + 1.0 / d + 4.0 / 25.0, 1e-12);
  EXPECT_TRUE(s.is_hermitian());
}

TEST(Berezin, UnitSpotValueAndAssociativity) {
  std::mt19937_64 rng(4);
  const SWKernel kernel(make_irrep(6));
  const SphereSymbol g = random_real_symbol(4, rng);
  EXPECT_LT(sup(berezin_exact(SphereSymbol::constant(1.0), g, kernel), g), 1e-11);
  // At two_j = 1 the operator with lower symbol n3 is σ3, whose square is 1.
  const SphereSymbol sq = berezin_exact(n(2), n(2), make_irrep(1));
  EXPECT_LT(sup(sq, SphereSymbol::constant(1.0)), 1e-12);
  const SphereSymbol f = random_real_symbol(3, rng);
  const SphereSymbol h = random_real_symbol(2, rng);
  const SphereSymbol left = berezin_exact(berezin_exact(f, g, kernel), h, kernel);
  const SphereSymbol right = berezin_exact(f, berezin_exact(g, h, kernel), kernel);
  EXPECT_LT(max_abs(left.data() - right.data()), 1e-9);
  EXPECT_THROW(berezin_exact(SphereSymbol::harmonic(7, 0), g, kernel), std::invalid_argument);
}

TEST(Poisson, BasicIdentities) {
  std::mt19937_64 rng(5);
  EXPECT_LT(sup(poisson_bracket(n(0), n(1)), n(2)), 1e-12);
  const SphereSymbol f = random_real_symbol(3, rng);
  const SphereSymbol g = random_real_symbol(3, rng);
  const SphereSymbol h = random_real_symbol(2, rng);
  EXPECT_LT(max_abs(poisson_bracket(f, f).data()), 1e-12);
  EXPECT_LT(max_abs((poisson_bracket(f, g) + poisson_bracket(g, f)).data()), 1e-12);
  const SphereSymbol jacobi = poisson_bracket(f, poisson_bracket(g, h)) +
                              poisson_bracket(g, poisson_bracket(h, f)) +
                              poisson_bracket(h, poisson_bracket(f, g));
  EXPECT_LT(max_abs(jacobi.data()), 1e-9);
}

TEST(Calibration, ConstraintsAndFreePoisson) {
  for (auto family : {ExpansionFamily::moyal, ExpansionFamily::berezin}) {
    const CalibrationReport& r = default_calibration(family);
    EXPECT_LT(r.identity_residual, 1e-12);
    EXPECT_NEAR(r.free_poisson, 1.0, 1e-3) << to_string(family);
    EXPECT_LE(r.residual_slope, -0.7);
    ASSERT_EQ(r.terms.size(), 4u);
    EXPECT_EQ(r.terms[0].coefficient, 0.0);
    EXPECT_EQ(r.terms[3].coefficient, 1.0);
  }
  EXPECT_NEAR(default_calibration(ExpansionFamily::berezin).terms[2].coefficient, 1.0, 1e-2);
}

TEST(Calibration, CorpusIsDeterministic) {
  const auto a = random_corpus(9, 3, 4);
  const auto b = random_corpus(9, 3, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(max_abs(a[i].first.data() - b[i].first.data()), 0.0);
    EXPECT_LE(a[i].first.band_limit(), 4);
    EXPECT_LT(a[i].first.hermiticity_residual(), 1e-15);
  }
}

TEST(Calibration, RejectsSingleSpin) {
  EXPECT_THROW(calibrate_order1(ExpansionFamily::moyal, {10}, random_corpus(1, 2, 2)),
               std::invalid_argument);
}

TEST(Calibration, FirstOrderTruncationSlope) {
  const auto corpus = random_corpus(7, 4, 3);
  const auto c = calibrated_coefficients(ExpansionFamily::moyal);
  std::vector<double> dims, errors;
  for (int two_j : {10, 20, 40, 80}) {
    const SWKernel kernel(make_irrep(two_j));
    double worst = 0.0;
    for (const auto& [f, g] : corpus) {
      const auto t = star_truncation(SemiclassicalSymbol({f}), SemiclassicalSymbol({g}), 1, c);
      worst = std::max(worst, sup(star_exact(f, g, kernel), t.truncated(two_j + 1.0)));
    }
    dims.push_back(two_j + 1.0);
    errors.push_back(worst);
  }
  EXPECT_NEAR(loglog_slope(dims, errors).slope, -2.0, 0.3);
}
