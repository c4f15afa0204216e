// Copyright 2026 The sphere-sapt Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file harness.hpp
 * @brief Batch experiment runner: one function per subcommand plus run().
 *
 * Every subcommand fills a RunReport with CSV tables, a JSON results object
 * and pass/fail checks. run() validates the configuration, times the run,
 * writes the files and maps the outcome to an exit code.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sphere_sapt/berry_geometry.hpp"
#include "sphere_sapt/report.hpp"
#include "sphere_sapt/sapt_engine.hpp"
#include "sphere_sapt/spin_orbit_model.hpp"
#include "sphere_sapt/star_product.hpp"
#include "sphere_sapt/sw_quant.hpp"

namespace sphere_sapt {

/// Exit codes of run().
enum ExitCode : int { kExitSuccess = 0, kExitCheckFailed = 1, kExitInvalidArguments = 2 };

/// Names of all subcommands in presentation order.
inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"kernel-check", "star-slopes",       "calibrate",
                                              "gap",          "chern",             "bands",
                                              "obstruction",  "invariance-slopes", "egorov"};
  return names;
}

/// Configuration of one subcommand run. Empty lists and unset optionals select
/// the subcommand defaults.
struct RunConfig {
  std::string subcommand;
  std::vector<int> two_js;
  std::vector<int> two_ss;
  std::vector<double> lambdas;
  int order = 1;
  int grid = 40;
  int thetas = 64;
  std::optional<std::uint64_t> seed;
  std::string output = "sphere-sapt-out";
  CoefficientSet coefficient_set = CoefficientSet::calibrated;
  std::optional<int> band;
  double t_final = 1.0;
  std::string observable = "n1";

  /// Throws std::invalid_argument for out-of-range values.
  void validate() const {
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), subcommand) == names.end())
      throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
    for (int tj : two_js)
      if (tj < 0 || tj > 200) throw std::invalid_argument("two_j must lie in [0, 200]");
    for (int ts : two_ss)
      if (ts < 1 || ts > 8) throw std::invalid_argument("two_s must lie in [1, 8]");
    for (double l : lambdas)
      if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (order < 0 || order > 1) throw std::invalid_argument("order must be 0 or 1");
    if (grid < 4 || grid > 400) throw std::invalid_argument("grid must lie in [4, 400]");
    if (thetas < 1 || thetas > 100000) throw std::invalid_argument("thetas must lie in [1, 100000]");
    if (!(t_final > 0.0 && t_final <= 100.0)) throw std::invalid_argument("t-final must lie in (0, 100]");
    if (observable != "n1" && observable != "n2" && observable != "n3")
      throw std::invalid_argument("observable must be n1, n2 or n3");
    if (band && *band < 0) throw std::invalid_argument("band must be nonnegative");
    if (output.empty()) throw std::invalid_argument("output directory must not be empty");
    const bool sweep = subcommand == "star-slopes" || subcommand == "calibrate" ||
                       subcommand == "bands" || subcommand == "invariance-slopes" ||
                       subcommand == "egorov";
    if (sweep && !two_js.empty() && two_js.size() < 2)
      throw std::invalid_argument(subcommand + " fits a slope and needs at least two spins");
  }

  Json to_json() const {
    Json j;
    j["subcommand"] = subcommand;
    j["two_j"] = two_js;
    j["two_s"] = two_ss;
    j["lambda"] = lambdas;
    j["order"] = order;
    j["grid"] = grid;
    j["thetas"] = thetas;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["output"] = output;
    j["coefficient_set"] = to_string(coefficient_set);
    j["band"] = band ? Json(*band) : Json(nullptr);
    j["t_final"] = t_final;
    j["observable"] = observable;
    return j;
  }
};

/**
 * @brief Parses a key=value configuration file.
 *
 * Blank lines and lines starting with '#' are skipped; surrounding whitespace
 * is trimmed. Throws std::invalid_argument for unreadable files and malformed
 * lines.
 */
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = v.find_last_not_of(" \t\r");
    return v.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(number) + ": expected key=value");
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

namespace detail {

template <typename T>
std::vector<T> or_default(const std::vector<T>& v, std::vector<T> fallback) {
  return v.empty() ? fallback : v;
}

/// "+", "-" for s = ½, otherwise m written as an integer or half-integer.
inline std::string band_name(int two_s, int band) {
  const int two_m = two_s - 2 * band;
  if (two_s == 1) return two_m > 0 ? "+" : "-";
  if (two_m % 2 == 0) return (two_m > 0 ? "+" : "") + std::to_string(two_m / 2);
  return (two_m > 0 ? "+" : "") + std::to_string(two_m) + "/2";
}

inline CheckResult slope_check(const std::string& name, const SweepTable& t, double target, double tol) {
  if (!t.fit) return {name, false, std::nan(""), "slope " + format_number(target) + " +/- " + format_number(tol)};
  CheckResult c = check_near(name, t.fit->slope, target, tol);
  c.target = "slope " + c.target;
  return c;
}

inline void sweep_rows(CsvTable& table, const std::string& prefix_a, const std::string& prefix_b,
                       const std::string& quantity, const SweepTable& t) {
  for (std::size_t i = 0; i < t.dims.size(); ++i)
    table.add(prefix_a, prefix_b, t.dims[i], quantity, t.values[i]);
}

inline SphereSymbol random_band_limited(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SphereSymbol f(L, 1);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) f(l, m) = cplx(g(rng), g(rng));
  return f;
}

inline Matrix random_operator(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  return a;
}

inline double sup_norm(const SphereSymbol& a, const SphereSymbol& b) {
  const int L = std::max(a.band_limit(), b.band_limit());
  return sup_distance(a, b, *cached_grid(2 * L + 2));
}

}  // namespace detail

// ============================================================================
// Subcommands
// ============================================================================

/// Kernel properties (a)-(e), both round trips, and the exact model symbols.
inline RunReport run_kernel_check(const RunConfig& cfg) {
  RunReport r;
  r.seed = cfg.seed.value_or(kDefaultCalibrationSeed);
  const auto kernel_spins = detail::or_default(cfg.two_js, {1, 2, 3, 5, 10, 20});
  const auto symbol_spins = detail::or_default(cfg.two_js, {3, 4, 5, 6, 7, 8, 9, 10, 11});
  const auto lambdas = detail::or_default(cfg.lambdas, {0.0, 0.2, 0.8, 1.0});
  const int two_s = cfg.two_ss.empty() ? 1 : cfg.two_ss.front();

  CsvTable& axioms = r.table("axioms", {"two_j", "property", "residual"});
  CsvTable& trips = r.table("round_trip", {"two_j", "check", "residual"});
  double axiom_max = 0.0, trip_max = 0.0, high_max = 0.0;
  std::mt19937_64 rng(*r.seed);
  for (int two_j : kernel_spins) {
    const SpinIrrep irrep = make_irrep(two_j);
    KernelAxioms a;
    try {
      SWKernel k = build_kernel(irrep, make_grid(2 * two_j + 2));
      a = kernel_axiom_residuals(k, rng(), 20);
    } catch (const std::runtime_error&) {
      a.hermiticity = a.resolution = a.reproducing = a.trace_duality = a.covariance =
          std::numeric_limits<double>::infinity();
    }
    axioms.add(two_j, "hermiticity", a.hermiticity);
    axioms.add(two_j, "resolution", a.resolution);
    axioms.add(two_j, "reproducing", a.reproducing);
    axioms.add(two_j, "trace_duality", a.trace_duality);
    axioms.add(two_j, "covariance", a.covariance);
    axiom_max = std::max(axiom_max, a.max());

    const SWKernel kernel(irrep);
    const SphereSymbol f = detail::random_band_limited(two_j, rng);
    const double sym = max_abs(Matrix(dequantize(quantize(f, kernel), kernel).data() - f.data()));
    const Matrix op = detail::random_operator(irrep.dim(), rng);
    const double opr = max_abs(Matrix(quantize(dequantize(op, kernel), kernel) - op));
    double high = 0.0;
    for (int m = -(two_j + 1); m <= two_j + 1; ++m)
      high = std::max(high, max_abs(quantize(SphereSymbol::harmonic(two_j + 1, m), kernel)));
    trips.add(two_j, "dequantize_quantize", sym);
    trips.add(two_j, "quantize_dequantize", opr);
    trips.add(two_j, "quantize_high_degree", high);
    trip_max = std::max({trip_max, sym, opr});
    high_max = std::max(high_max, high);
  }

  CsvTable& symbols = r.table("model_symbol", {"two_j", "lambda", "sw_residual", "lower_residual"});
  double sw_max = 0.0, lower_max = 0.0;
  for (double lambda : lambdas)
    for (int two_j : symbol_spins) {
      if (two_j <= two_s) continue;
      const ModelParams p{two_j, two_s, lambda};
      const SWKernel kernel(*cached_irrep(two_j));
      const Matrix h = build_hamiltonian(p);
      const double sw = detail::sup_norm(dequantize(h, kernel, p.dim_s()), hamiltonian_symbol_exact(p));
      const double lower =
          detail::sup_norm(lower_symbol_spectral(h, kernel, p.dim_s()), hamiltonian_lower_symbol(p));
      symbols.add(two_j, lambda, sw, lower);
      sw_max = std::max(sw_max, sw);
      lower_max = std::max(lower_max, lower);
    }
  r.checks.push_back(check_below("kernel_properties", axiom_max, 1e-10));
  r.checks.push_back(check_below("round_trips", trip_max, 1e-10));
  r.checks.push_back(check_below("high_degree_projected_out", high_max, 1e-10));
  r.checks.push_back(check_below("exact_symbol", sw_max, 1e-10));
  r.checks.push_back(check_below("exact_lower_symbol", lower_max, 1e-10));
  r.results["max_property_residual"] = axiom_max;
  r.results["max_round_trip_residual"] = trip_max;
  r.results["max_symbol_residual"] = sw_max;
  r.results["max_lower_symbol_residual"] = lower_max;
  return r;
}

/// Truncation-error slopes of both families, the spot value and Berezin associativity.
inline RunReport run_star_slopes(const RunConfig& cfg) {
  RunReport r;
  r.seed = cfg.seed.value_or(kDefaultEvaluationSeed);
  const auto spins = detail::or_default(cfg.two_js, default_calibration_spins());

  const SWKernel half(make_irrep(1));
  const SphereSymbol n3 = SphereSymbol::coordinate(2);
  const double spot = star_exact(n3, n3, half).evaluate(0.7, 0.3)(0, 0).real();
  r.checks.push_back(check_near("spot_value_n3_n3", spot, 1.0 / 3.0, 1e-12));
  r.results["spot_value_n3_n3"] = spot;

  CsvTable& table = r.table("truncation", {"family", "set", "d_j", "quantity", "value"});
  for (ExpansionFamily fam : {ExpansionFamily::moyal, ExpansionFamily::berezin}) {
    const TruncationSlopes t = truncation_slopes(fam, cfg.coefficient_set, spins, *r.seed);
    const std::string name = to_string(fam);
    detail::sweep_rows(table, name, to_string(cfg.coefficient_set), "order0", t.order0);
    detail::sweep_rows(table, name, to_string(cfg.coefficient_set), "order1", t.order1);
    Json fj;
    fj["order0"] = to_json(t.order0);
    fj["order1"] = to_json(t.order1);
    if (fam == ExpansionFamily::moyal) {
      r.checks.push_back(detail::slope_check("moyal_order0_slope", t.order0, -1.0, 0.3));
      r.checks.push_back(detail::slope_check("moyal_order1_slope", t.order1, -2.0, 0.3));
      r.checks.push_back(detail::slope_check("moyal_commutator_slope", *t.commutator, -2.0, 0.3));
      detail::sweep_rows(table, name, to_string(cfg.coefficient_set), "commutator", *t.commutator);
      fj["commutator"] = to_json(*t.commutator);
      std::vector<double> scaled;
      for (std::size_t i = 0; i < t.commutator->dims.size(); ++i)
        scaled.push_back(std::pow(t.commutator->dims[i], 2) * t.commutator->values[i]);
      fj["commutator_times_d2"] = scaled;
    } else {
      r.checks.push_back(detail::slope_check("berezin_order1_slope", t.order1, -2.0, 0.3));
    }
    r.results[name] = fj;
  }

  const auto corpus = random_corpus(*r.seed, 10, 4);
  const SWKernel kernel(make_irrep(20));
  double assoc = 0.0;
  for (std::size_t i = 0; i + 1 < corpus.size(); ++i) {
    const auto& [f, g] = corpus[i];
    const SphereSymbol& h = corpus[i + 1].first;
    assoc = std::max(assoc, detail::sup_norm(berezin_exact(berezin_exact(f, g, kernel), h, kernel),
                                             berezin_exact(f, berezin_exact(g, h, kernel), kernel)));
  }
  r.checks.push_back(check_below("berezin_associativity", assoc, 1e-9));
  r.results["berezin_associativity_residual"] = assoc;

  CsvTable& anomaly = r.table("printed_anomaly", {"family", "d_j", "unit_deviation", "d_times_deviation"});
  for (ExpansionFamily fam : {ExpansionFamily::moyal, ExpansionFamily::berezin})
    for (int two_j : spins) {
      const double d = two_j + 1.0;
      const double dev = unit_symbol_deviation(printed_coefficients(fam), d);
      anomaly.add(to_string(fam), two_j + 1, dev, d * dev);
    }
  return r;
}

/// Order-1 calibration report for both families.
inline RunReport run_calibrate(const RunConfig& cfg) {
  RunReport r;
  r.seed = cfg.seed.value_or(kDefaultCalibrationSeed);
  const auto spins = detail::or_default(cfg.two_js, default_calibration_spins());
  CsvTable& per_dim = r.table("per_dim", {"family", "d_j", "laplacian", "gradient_dot", "residual"});
  for (ExpansionFamily fam : {ExpansionFamily::moyal, ExpansionFamily::berezin}) {
    const CalibrationReport c = calibrate_order1(fam, spins, random_corpus(*r.seed, 10, 4));
    const std::string name = to_string(fam);
    Json fj;
    Json terms = Json::array();
    for (const auto& t : c.terms) {
      Json tj;
      tj["term"] = t.term;
      tj["coefficient"] = t.coefficient;
      tj["std_error"] = t.std_error;
      tj["residual_slope"] = t.residual_slope;
      terms.push_back(tj);
    }
    fj["terms"] = terms;
    fj["residual_slope"] = c.residual_slope;
    fj["free_poisson"] = c.free_poisson;
    fj["free_poisson_std_error"] = c.free_poisson_std_error;
    fj["identity_residual"] = c.identity_residual;
    r.results[name] = fj;
    for (std::size_t i = 0; i < c.dims.size(); ++i)
      per_dim.add(name, c.dims[i], c.per_dim[i][0], c.per_dim[i][1], c.residuals[i]);
    r.checks.push_back(check_below(name + "_constants_annihilated", c.identity_residual, 1e-12));
    r.checks.push_back(check_near(name + "_free_poisson", c.free_poisson, 1.0, 1e-3));
    r.checks.push_back(check_below(name + "_residual_slope", c.residual_slope, -0.7));
  }
  return r;
}

/// N(θ, λ) profiles on a uniform θ grid.
inline RunReport run_gap(const RunConfig& cfg) {
  RunReport r;
  const auto lambdas = detail::or_default(cfg.lambdas, {0.0, 0.45, 0.495, 0.5, 0.505, 0.55, 1.0});
  const int two_s = cfg.two_ss.empty() ? 1 : cfg.two_ss.front();
  CsvTable& table = r.table("profile", {"lambda", "theta", "gap"});
  Json profiles = Json::array();
  double pole_error = 0.0;
  for (double lambda : lambdas) {
    const GapProfile g = gap_profile(lambda, two_s, cfg.thetas);
    for (std::size_t i = 0; i < g.thetas.size(); ++i) table.add(lambda, g.thetas[i], g.gaps[i]);
    const double at_pi = g.gaps.back();
    pole_error = std::max(pole_error, std::abs(at_pi - std::abs(1.0 - 2.0 * lambda)));
    Json pj;
    pj["lambda"] = lambda;
    pj["gap_at_pi"] = at_pi;
    pj["min_gap"] = g.min_gap;
    pj["argmin"] = g.argmin;
    profiles.push_back(pj);
    if (lambda == 0.5) r.checks.push_back(check_below("min_gap_at_half", g.min_gap, 1e-12));
  }
  r.results["profiles"] = profiles;
  r.checks.push_back(check_below("gap_at_pi", pole_error, 1e-12));
  return r;
}

/// Plaquette Chern numbers of every band, at the lattice size and its refinement.
inline RunReport run_chern(const RunConfig& cfg) {
  RunReport r;
  const auto spins = detail::or_default(cfg.two_ss, {1, 2, 3});
  const auto lambdas = detail::or_default(cfg.lambdas, {0.2, 0.8});
  CsvTable& table = r.table("chern", {"two_s", "lambda", "band", "m", "grid", "chern", "refined_chern", "expected"});
  Json out = Json::array();
  bool exact = true, stable = true;
  for (int two_s : spins)
    for (double lambda : lambdas)
      for (int band = 0; band <= two_s; ++band) {
        if (cfg.band && *cfg.band != band) continue;
        const double m = band_label(two_s, band);
        const int c = chern_plaquette(two_s, band, lambda, cfg.grid, cfg.grid);
        const int refined = chern_plaquette(two_s, band, lambda, 2 * cfg.grid, 2 * cfg.grid);
        const int expected = lambda > 0.5 ? static_cast<int>(std::lround(-2.0 * m)) : 0;
        table.add(two_s, lambda, detail::band_name(two_s, band), m, cfg.grid, c, refined, expected);
        exact = exact && c == expected;
        stable = stable && c == refined;
        Json bj;
        bj["two_s"] = two_s;
        bj["lambda"] = lambda;
        bj["band"] = detail::band_name(two_s, band);
        bj["m"] = m;
        bj["chern"] = c;
        bj["refined_chern"] = refined;
        out.push_back(bj);
      }
  r.results["bands"] = out;
  r.checks.push_back({"chern_values", exact, exact ? 1.0 : 0.0, "0 for lambda < 1/2, -2m above"});
  r.checks.push_back({"refinement_stable", stable, stable ? 1.0 : 0.0, "equal at grid and 2*grid"});
  return r;
}

/// Effective-spectrum slopes, two-path h1 agreement and the decoupled limit.
inline RunReport run_bands(const RunConfig& cfg) {
  RunReport r;
  const auto spins = detail::or_default(cfg.two_js, default_calibration_spins());
  const double lambda = cfg.lambdas.empty() ? 0.2 : cfg.lambdas.front();
  const int two_s = cfg.two_ss.empty() ? 1 : cfg.two_ss.front();
  CsvTable& table = r.table("hausdorff", {"band", "order", "d_j", "quantity", "value"});
  Json sweeps = Json::array();
  for (int band = 0; band <= two_s; ++band) {
    if (cfg.band && *cfg.band != band) continue;
    for (int order = 0; order <= cfg.order; ++order) {
      const SweepTable t = band_spectrum_compare(two_s, lambda, spins, band, order, cfg.coefficient_set);
      detail::sweep_rows(table, detail::band_name(two_s, band), std::to_string(order), "hausdorff", t);
      const std::string name = "band_" + detail::band_name(two_s, band) + "_order" + std::to_string(order);
      r.checks.push_back(order == 0 ? detail::slope_check(name + "_slope", t, -1.0, 0.3)
                                    : detail::slope_check(name + "_slope", t, -2.0, 0.4));
      Json sj = to_json(t);
      sj["band"] = detail::band_name(two_s, band);
      sj["order"] = order;
      sweeps.push_back(sj);
    }
  }
  r.results["sweeps"] = sweeps;

  CsvTable& h1 = r.table("first_order", {"band", "theta", "phi", "closed_form", "star_machinery", "berry_form"});
  const int ref_two_j = spins.front();
  double agreement = 0.0, decoupled = 0.0;
  for (int band = 0; band <= two_s; ++band) {
    if (cfg.band && *cfg.band != band) continue;
    const auto a = effective_hamiltonian({ref_two_j, two_s, lambda}, band, 1, EffectivePath::closed_form,
                                         cfg.coefficient_set);
    const auto b = effective_hamiltonian({ref_two_j, two_s, lambda}, band, 1, EffectivePath::star_machinery,
                                         cfg.coefficient_set);
    for (double theta : {0.3, 1.1, kPi / 2, 2.5})
      for (double phi : {0.4, 2.0, 5.0}) {
        const double x = a.scalar.term(1).evaluate(theta, phi)(0, 0).real();
        const double y = b.scalar.term(1).evaluate(theta, phi)(0, 0).real();
        const double berry = two_s == 1 ? berry_form_first_order(band, lambda, theta) : std::nan("");
        h1.add(detail::band_name(two_s, band), theta, phi, x, y, berry);
        agreement = std::max(agreement, std::abs(x - y));
      }
    for (auto path : {EffectivePath::closed_form, EffectivePath::star_machinery}) {
      const auto z = effective_hamiltonian({ref_two_j, two_s, 0.0}, band, 1, path, cfg.coefficient_set);
      decoupled = std::max(decoupled, max_abs(z.scalar.term(1).data()));
    }
  }
  r.checks.push_back(check_below("two_path_agreement", agreement, 1e-8));
  r.checks.push_back(check_equal("h1_vanishes_at_lambda_0", decoupled, 0.0));
  r.results["two_path_max_difference"] = agreement;
  r.results["lambda"] = lambda;
  return r;
}

/// Exact band ranks against the reference rank d_j.
inline RunReport run_obstruction(const RunConfig& cfg) {
  RunReport r;
  const auto spins = detail::or_default(cfg.two_js, {2, 8});
  const auto lambdas = detail::or_default(cfg.lambdas, {0.8, 1.0});
  const int two_s = cfg.two_ss.empty() ? 1 : cfg.two_ss.front();
  CsvTable& table =
      r.table("ranks", {"lambda", "two_j", "band", "rank", "expected_rank", "reference_rank", "gap_ratio"});
  bool ranks_ok = true, mismatch_ok = true;
  Json rows = Json::array();
  for (double lambda : lambdas)
    for (int two_j : spins) {
      const ExactBands eb = exact_band_projection({two_j, two_s, lambda});
      const int d = two_j + 1;
      for (int band = 0; band <= two_s; ++band) {
        const int two_m = two_s - 2 * band;
        const int expected = lambda > 0.5 ? d + two_m : d;
        const int rank = eb.clusters[static_cast<std::size_t>(band)].rank;
        table.add(lambda, two_j, detail::band_name(two_s, band), rank, expected, eb.reference_rank, eb.gap_ratio);
        ranks_ok = ranks_ok && rank == expected;
        if (lambda > 0.5 && two_m != 0) mismatch_ok = mismatch_ok && rank != eb.reference_rank;
        Json rj;
        rj["lambda"] = lambda;
        rj["two_j"] = two_j;
        rj["band"] = detail::band_name(two_s, band);
        rj["rank"] = rank;
        rj["reference_rank"] = eb.reference_rank;
        rows.push_back(rj);
      }
    }
  r.results["ranks"] = rows;
  r.checks.push_back({"exact_ranks", ranks_ok, ranks_ok ? 1.0 : 0.0, "d_j + 2m above lambda 1/2, d_j below"});
  r.checks.push_back({"reference_mismatch", mismatch_ok, mismatch_ok ? 1.0 : 0.0, "rank != d_j when m != 0"});
  return r;
}

/// ‖[Ĥ, Π̂]‖ slopes for the order-0 and order-1 Moyal projections.
inline RunReport run_invariance_slopes(const RunConfig& cfg) {
  RunReport r;
  const auto spins = detail::or_default(cfg.two_js, default_calibration_spins());
  const double lambda = cfg.lambdas.empty() ? 0.2 : cfg.lambdas.front();
  const int two_s = cfg.two_ss.empty() ? 1 : cfg.two_ss.front();
  const int band = cfg.band.value_or(0);
  if (band > two_s) throw std::invalid_argument("band index out of range");
  CsvTable& table = r.table("commutator_norm", {"band", "order", "d_j", "quantity", "value"});
  Json sweeps = Json::array();
  for (int order = 0; order <= cfg.order; ++order) {
    const SweepTable t = almost_invariance_norms(two_s, lambda, spins, band, order, cfg.coefficient_set);
    detail::sweep_rows(table, detail::band_name(two_s, band), std::to_string(order), "commutator_norm", t);
    r.checks.push_back(detail::slope_check("order" + std::to_string(order) + "_slope", t,
                                           -1.0 - order, 0.3));
    Json sj = to_json(t);
    sj["order"] = order;
    sweeps.push_back(sj);
  }
  const MoyalProjection mp = moyal_projection({spins.front(), two_s, lambda}, band, cfg.order, cfg.coefficient_set);
  r.results["sweeps"] = sweeps;
  r.results["idempotency_residual"] = mp.idempotency_residual;
  r.results["commutation_residual"] = mp.commutation_residual;
  return r;
}

/// Quantum-vs-classical error of the Heisenberg evolution against the band flow.
inline RunReport run_egorov(const RunConfig& cfg) {
  RunReport r;
  const auto spins = detail::or_default(cfg.two_js, default_calibration_spins());
  const double lambda = cfg.lambdas.empty() ? 0.2 : cfg.lambdas.front();
  const int band = cfg.band.value_or(0);
  if (band > 1) throw std::invalid_argument("egorov runs on the s = 1/2 model; band must be 0 or 1");
  const int axis = cfg.observable[1] - '1';
  const EgorovTable e = egorov_error(lambda, band, SphereSymbol::coordinate(axis), spins, cfg.t_final,
                                     cfg.coefficient_set);
  CsvTable& table = r.table("error", {"observable", "band", "d_j", "quantity", "value"});
  detail::sweep_rows(table, cfg.observable, detail::band_name(1, band), "sup_error", e.errors);
  r.checks.push_back(detail::slope_check("error_slope", e.errors, -1.0, 0.3));
  r.checks.push_back(check_below("norm_drift", e.max_norm_drift, 1e-10));
  r.checks.push_back(check_below("energy_drift", e.max_energy_drift, 1e-8));
  r.results["errors"] = to_json(e.errors);
  r.results["max_norm_drift"] = e.max_norm_drift;
  r.results["max_energy_drift"] = e.max_energy_drift;
  r.results["time_sign"] = kEgorovTimeSign;
  return r;
}

/// Runs the configured subcommand without writing files.
inline RunReport execute(const RunConfig& cfg) {
  cfg.validate();
  static const std::map<std::string, std::function<RunReport(const RunConfig&)>> table{
      {"kernel-check", run_kernel_check},   {"star-slopes", run_star_slopes},
      {"calibrate", run_calibrate},         {"gap", run_gap},
      {"chern", run_chern},                 {"bands", run_bands},
      {"obstruction", run_obstruction},     {"invariance-slopes", run_invariance_slopes},
      {"egorov", run_egorov}};
  const auto start = std::chrono::steady_clock::now();
  RunReport report = table.at(cfg.subcommand)(cfg);
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.subcommand = cfg.subcommand;
  report.config = cfg.to_json();
  return report;
}

/**
 * @brief Runs a subcommand, writes its files and prints one line per check.
 *
 * Returns kExitInvalidArguments for invalid configurations and unwritable
 * output paths, kExitCheckFailed when a check fails or a computation throws,
 * and kExitSuccess otherwise.
 */
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunReport report;
  try {
    report = execute(cfg);
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitInvalidArguments;
  } catch (const std::exception& e) {
    err << cfg.subcommand << " failed: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  try {
    for (const auto& path : emit(report, cfg.output)) out << "wrote " << path.string() << "\n";
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitInvalidArguments;
  }
  for (const auto& c : report.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_number(c.value)
        << " target " << c.target << "\n";
  return report.passed() ? kExitSuccess : kExitCheckFailed;
}

}  // namespace sphere_sapt
