// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file berry_geometry.hpp
 * @brief Berry-Simon connection, curvature and Chern numbers of the bands.
 *
 * For the frame ψ_m = u0† e_m the connection A = i<ψ, dψ> and curvature
 * F = dA are sampled from exact derivatives of u0. Chern numbers use the
 * plaquette method on a (θ, φ) product lattice, which only needs projector
 * values and yields an integer independent of the frame's gauge.
 */

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sphere_sapt/sphere_calculus.hpp"
#include "sphere_sapt/spin_orbit_model.hpp"

namespace sphere_sapt {

/// Connection and curvature of one band on a quadrature grid.
struct BerryData {
  int two_s = 1;
  int band = 0;                      ///< a = s − m
  double lambda = 0.0;
  std::shared_ptr<const Grid> grid;
  std::vector<double> a_theta;       ///< A_θ at grid nodes
  std::vector<double> a_phi;         ///< A_φ at grid nodes
  std::vector<double> f_theta_phi;   ///< F_θφ at grid nodes
  double curvature_integral = 0.0;   ///< ∫ F over S²
  int chern = 0;                     ///< plaquette Chern number
};

/// Frame vector ψ_m and its θ, φ derivatives at one point.
struct FrameJet {
  Vector psi, d_theta, d_phi;
};

inline FrameJet band_frame_jet(double theta, double phi, double lambda, int two_s, int band) {
  const auto s = cached_irrep(two_s);
  const Matrix u0_adj = reference_unitary(theta, phi, lambda, two_s).adjoint();
  const Matrix& s2 = s->J2();
  const Matrix& s3 = s->J3();
  FrameJet jet;
  jet.psi = u0_adj.col(band);
  // u0† = e^{−iφS3} e^{−iθ_λ S2} e^{iφS3}.
  const Matrix rot = s->exp_i_J2(-rotated_polar_angle(theta, lambda));
  Vector phase(two_s + 1), left(two_s + 1);
  for (int k = 0; k <= two_s; ++k) {
    const double mk = band_label(two_s, k);
    left(k) = std::exp(-kI * (phi * mk));
    phase(k) = std::exp(kI * (phi * mk));
  }
  const Matrix d_rot = (-kI * rotated_polar_derivative(theta, lambda)) * (s2 * rot);
  jet.d_theta = (left.asDiagonal() * d_rot * phase.asDiagonal()).col(band);
  jet.d_phi = ((-kI) * s3 * u0_adj + kI * u0_adj * s3).col(band);
  return jet;
}

/**
 * @brief Berry data of band a on a Gauss-Legendre grid exact to l_exact.
 *
 * A_θ = i<ψ, ∂θψ>, A_φ = i<ψ, ∂φψ>, F_θφ = −2 Im<∂θψ, ∂φψ>; the chart is
 * singular at θ = π for λ > ½ but no grid node lies on the poles.
 */
inline BerryData berry_connection_curvature(int two_s, int band, double lambda, int l_exact = 40,
                                            int chern_lattice = 40);

/// Chern number of a projector field from plaquette link phases.
inline int chern_plaquette(const std::function<Matrix(double, double)>& projector, int n_theta,
                           int n_phi) {
  if (n_theta < 2 || n_phi < 3) throw std::invalid_argument("Chern lattice too coarse");
  std::vector<Vector> frame((n_theta + 1) * n_phi);
  auto at = [&](int i, int k) -> Vector& { return frame[i * n_phi + (k % n_phi)]; };
  for (int i = 0; i <= n_theta; ++i) {
    const double t = i == n_theta ? kPi : kPi * i / n_theta;
    for (int k = 0; k < n_phi; ++k) {
      const Matrix p = projector(t, 2.0 * kPi * k / n_phi);
      Eigen::Index best = 0;
      p.colwise().norm().maxCoeff(&best);
      at(i, k) = p.col(best).normalized();
    }
  }
  auto link = [](const Vector& a, const Vector& b) {
    const cplx z = a.dot(b);
    return std::abs(z) > 0.0 ? z / std::abs(z) : cplx(1.0);
  };
  double total = 0.0;
  for (int i = 0; i < n_theta; ++i)
    for (int k = 0; k < n_phi; ++k) {
      const cplx loop = link(at(i, k), at(i + 1, k)) * link(at(i + 1, k), at(i + 1, k + 1)) *
                        link(at(i + 1, k + 1), at(i, k + 1)) * link(at(i, k + 1), at(i, k));
      total += std::arg(loop);
    }
  return static_cast<int>(std::lround(-total / (2.0 * kPi)));
}

/// Chern number of band a of the model at λ (λ = ½ is rejected).
inline int chern_plaquette(int two_s, int band, double lambda, int n_theta = 40, int n_phi = 40) {
  if (std::abs(lambda - 0.5) < 1e-12)
    throw std::invalid_argument("projector field is singular at lambda = 1/2");
  if (band < 0 || band > two_s) throw std::invalid_argument("band index out of range");
  return chern_plaquette(
      [&](double t, double p) { return principal_bands(t, p, lambda, two_s).projectors[band]; },
      n_theta, n_phi);
}

inline BerryData berry_connection_curvature(int two_s, int band, double lambda, int l_exact,
                                            int chern_lattice) {
  if (std::abs(lambda - 0.5) < 1e-12)
    throw std::invalid_argument("Berry data is undefined at lambda = 1/2");
  BerryData b;
  b.two_s = two_s;
  b.band = band;
  b.lambda = lambda;
  b.grid = cached_grid(l_exact);
  const Grid& g = *b.grid;
  for (int p = 0; p < g.size(); ++p) {
    const double t = g.theta(g.ring(p));
    const FrameJet jet = band_frame_jet(t, g.phi(g.column(p)), lambda, two_s, band);
    b.a_theta.push_back((kI * jet.psi.dot(jet.d_theta)).real());
    b.a_phi.push_back((kI * jet.psi.dot(jet.d_phi)).real());
    b.f_theta_phi.push_back(-2.0 * jet.d_theta.dot(jet.d_phi).imag());
    b.curvature_integral += g.weight(p) * b.f_theta_phi.back() / g.sin_theta(g.ring(p));
  }
  b.chern = chern_plaquette(two_s, band, lambda, chern_lattice, chern_lattice);
  return b;
}

/// Closed-form A_φ = −m(1 − cos θ_λ).
inline double berry_connection_phi(double theta, double lambda, double m) {
  return -m * (1.0 - std::cos(rotated_polar_angle(theta, lambda)));
}

/// Closed-form F_θφ = −m sin θ_λ dθ_λ/dθ.
inline double berry_curvature(double theta, double lambda, double m) {
  return -m * std::sin(rotated_polar_angle(theta, lambda)) * rotated_polar_derivative(theta, lambda);
}

}  // namespace sphere_sapt
