// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "sphere_sapt/berry_geometry.hpp"

using namespace sphere_sapt;

TEST(Berry, DecoupledBandsAreFlat) {
  const BerryData b = berry_connection_curvature(1, 0, 0.0, 16, 12);
  for (std::size_t p = 0; p < b.a_phi.size(); ++p) {
    EXPECT_NEAR(b.a_theta[p], 0.0, 1e-14);
    EXPECT_NEAR(b.a_phi[p], 0.0, 1e-14);
    EXPECT_NEAR(b.f_theta_phi[p], 0.0, 1e-14);
  }
  EXPECT_EQ(b.chern, 0);
}

TEST(Berry, SpinHalfClosedForm) {
  for (double lambda : {0.2, 0.8}) {
    for (int band : {0, 1}) {
      const BerryData b = berry_connection_curvature(1, band, lambda, 30, 20);
      const double m = band_label(1, band);
      const Grid& g = *b.grid;
      for (int p = 0; p < g.size(); ++p) {
        const double t = g.theta(g.ring(p));
        EXPECT_NEAR(b.a_theta[p], 0.0, 1e-12);
        EXPECT_NEAR(b.a_phi[p], berry_connection_phi(t, lambda, m), 1e-8);
        EXPECT_NEAR(b.f_theta_phi[p], berry_curvature(t, lambda, m), 1e-8);
      }
    }
  }
}

TEST(Berry, CurvatureIntegralAtStrongCoupling) {
  const BerryData plus = berry_connection_curvature(1, 0, 0.8, 60, 20);
  EXPECT_NEAR(plus.curvature_integral, -2.0 * kPi, 1e-6);
  EXPECT_EQ(plus.chern, -1);
  const BerryData weak = berry_connection_curvature(1, 0, 0.2, 60, 20);
  EXPECT_NEAR(weak.curvature_integral, 0.0, 1e-6);
}

TEST(Berry, CurvatureIsCurlOfConnection) {
  // F_θφ = ∂θ A_φ − ∂φ A_θ with A_θ = 0; central differences converge as h².
  const double t = 1.3, ph = 0.4, lambda = 0.3;
  double previous = 0.0;
  for (double h : {1e-2, 5e-3}) {
    const FrameJet j = band_frame_jet(t, ph, lambda, 2, 0);
    const double f = -2.0 * j.d_theta.dot(j.d_phi).imag();
    auto aphi = [&](double th) {
      const FrameJet k = band_frame_jet(th, ph, lambda, 2, 0);
      return (kI * k.psi.dot(k.d_phi)).real();
    };
    const double err = std::abs((aphi(t + h) - aphi(t - h)) / (2 * h) - f);
    if (previous > 0.0) EXPECT_NEAR(previous / err, 4.0, 0.2);
    previous = err;
  }
}

TEST(Berry, FrameDerivativesMatchFiniteDifferences) {
  const double t = 0.9, ph = 2.2, lambda = 0.7, h = 1e-6;
  for (int band = 0; band <= 3; ++band) {
    const FrameJet j = band_frame_jet(t, ph, lambda, 3, band);
    const Vector dt = (band_frame_jet(t + h, ph, lambda, 3, band).psi -
                       band_frame_jet(t - h, ph, lambda, 3, band).psi) / (2 * h);
    const Vector dp = (band_frame_jet(t, ph + h, lambda, 3, band).psi -
                       band_frame_jet(t, ph - h, lambda, 3, band).psi) / (2 * h);
    EXPECT_LT((dt - j.d_theta).norm(), 1e-8);
    EXPECT_LT((dp - j.d_phi).norm(), 1e-8);
  }
}

TEST(Chern, SpinHalfValues) {
  EXPECT_EQ(chern_plaquette(1, 0, 0.2), 0);
  EXPECT_EQ(chern_plaquette(1, 1, 0.2), 0);
  EXPECT_EQ(chern_plaquette(1, 0, 0.8), -1);
  EXPECT_EQ(chern_plaquette(1, 1, 0.8), 1);
}

TEST(Chern, HigherSpinValues) {
  for (int two_s : {2, 3}) {
    int total = 0;
    for (int a = 0; a <= two_s; ++a) {
      const int c = chern_plaquette(two_s, a, 0.8);
      EXPECT_EQ(c, -static_cast<int>(std::lround(2.0 * band_label(two_s, a)))) << two_s << " " << a;
      EXPECT_EQ(chern_plaquette(two_s, a, 0.2), 0);
      total += c;
    }
    EXPECT_EQ(total, 0);
  }
}

TEST(Chern, StableUnderRefinement) {
  for (int two_s : {1, 2, 3})
    for (double lambda : {0.2, 0.8})
      for (int a = 0; a <= two_s; ++a)
        EXPECT_EQ(chern_plaquette(two_s, a, lambda, 20, 20),
                  chern_plaquette(two_s, a, lambda, 80, 80));
}

TEST(Chern, JumpsOnlyAcrossHalf) {
  for (double lambda : {0.0, 0.1, 0.3, 0.45, 0.49})
    EXPECT_EQ(chern_plaquette(1, 0, lambda, 60, 60), 0) << lambda;
  for (double lambda : {0.51, 0.55, 0.7, 0.9, 1.0})
    EXPECT_EQ(chern_plaquette(1, 0, lambda, 60, 60), -1) << lambda;
  EXPECT_THROW(chern_plaquette(1, 0, 0.5), std::invalid_argument);
}

TEST(Chern, GenericFieldFromBlochVector) {
  // π+ = (1 + n_λ·σ)/2 built without any eigenframe.
  auto field = [](double t, double p) {
    const double lambda = 0.8;
    const Vec3 n = unit_vector(t, p);
    Vec3 b(lambda * n(0), lambda * n(1), 1.0 - lambda + lambda * n(2));
    b.normalize();
    Matrix pr(2, 2);
    pr << 1.0 + b(2), cplx(b(0), -b(1)), cplx(b(0), b(1)), 1.0 - b(2);
    return Matrix(0.5 * pr);
  };
  EXPECT_EQ(chern_plaquette(field, 30, 30), -1);
  EXPECT_EQ(chern_plaquette([](double, double) { return Matrix::Identity(1, 1).eval(); }, 8, 8), 0);
}
