// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/// @file slope_fit.hpp
/// @brief Ordinary least squares in log-log space with a Student-t interval, and d_j sweeps.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace sphere_sapt {

/// Fit of log y = intercept + slope · log x.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci95 = 0.0;       ///< half-width of the 95% interval for the slope
  double residual = 0.0;   ///< root-mean-square log residual
  int n_points = 0;
};

/// Fits a power law to positive data. Throws std::invalid_argument on fewer
/// than two points or non-positive values.
inline SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope fit needs at least two paired points");
  const int n = static_cast<int>(x.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("slope fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += r * r;
  }
  fit.residual = std::sqrt(sse / n);
  if (n > 2) {
    const boost::math::students_t dist(n - 2);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci95 = t * std::sqrt(sse / (n - 2) / sxx);
  } else {
    fit.ci95 = std::numeric_limits<double>::infinity();
  }
  return fit;
}

/// fn(i) for i in [0, n), evaluated on a pool of worker threads and returned in index order.
template <typename Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) slots[i].emplace(fn(i));
  };
  const std::size_t n_workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < n_workers; ++w) jobs.push_back(std::async(std::launch::async, worker));
  for (auto& job : jobs) job.get();
  std::vector<Result> out;
  out.reserve(n);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

/// A d_j sweep with a fitted log-log slope.
struct SweepTable {
  std::vector<int> dims;
  std::vector<double> values;
  std::optional<SlopeFit> fit;  ///< absent when some value is zero
};

inline void fit_sweep(SweepTable& t) {
  std::vector<double> x(t.dims.begin(), t.dims.end());
  if (t.values.size() >= 2 &&
      std::all_of(t.values.begin(), t.values.end(), [](double v) { return v > 0.0; }))
    t.fit = loglog_slope(x, t.values);
}

/// Evaluates value(two_j) for every spin concurrently; dims are d_j = two_j + 1.
template <typename Fn>
SweepTable run_sweep(const std::vector<int>& two_js, Fn&& value) {
  SweepTable t;
  t.values = parallel_map(two_js.size(), [&](std::size_t i) { return double(value(two_js[i])); });
  for (int two_j : two_js) t.dims.push_back(two_j + 1);
  fit_sweep(t);
  return t;
}

}  // namespace sphere_sapt
