#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kimura/errors.hpp"
#include "kimura/evolution.hpp"
#include "kimura/fd_oracle.hpp"
#include "kimura/fixation.hpp"
#include "kimura/scenario.hpp"
#include "kimura/spectral.hpp"
#include "kimura/svg_plot.hpp"
#include "kimura/weak_form.hpp"

namespace kimura {

namespace fs = std::filesystem;

/// Exit-code contract of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitViolation = 2 };

/// Invariant checks collected during a run; any failure maps to exit code 2.
class CheckList {
 public:
  void at_most(const std::string& name, double value, double limit) { add(name, value, limit, value <= limit); }
  void at_least(const std::string& name, double value, double limit) { add(name, value, limit, value >= limit); }
  void require(const std::string& name, bool ok) {
    items_.push_back({{"name", name}, {"pass", ok}});
    ok_ = ok_ && ok;
  }

  bool ok() const { return ok_; }
  const nlohmann::json& json() const { return items_; }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& item : items_)
      if (!item["pass"].get<bool>()) out.push_back(item["name"].get<std::string>());
    return out;
  }

 private:
  void add(const std::string& name, double value, double limit, bool ok) {
    items_.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", ok}});
    ok_ = ok_ && ok;
  }

  nlohmann::json items_ = nlohmann::json::array();
  bool ok_ = true;
};

struct RunResult {
  nlohmann::json summary;
  CheckList checks;
  std::vector<std::string> files;

  int exit_code() const { return checks.ok() ? kExitOk : kExitViolation; }
};

namespace detail {

inline void write_text(const fs::path& path, const std::string& text, std::vector<std::string>& files) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  files.push_back(path.string());
}

inline void write_json(const fs::path& path, const nlohmann::json& j, std::vector<std::string>& files) {
  write_text(path, j.dump(2) + "\n", files);
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, e);
  return m;
}

/// Spectral-basis checks shared by every subcommand that builds a basis.
inline nlohmann::json spectrum_json(const CoefficientModel& model, const SpectralBasis& basis, const Tolerances& tol,
                                    CheckList& checks) {
  nlohmann::json j;
  j["modes"] = basis.modes();
  j["grid"] = basis.n_interior;
  j["lambda"] = basis.eigenvalues;
  j["Q"] = basis.Q;
  std::vector<double> q0, q1;
  for (const auto& q : basis.q) {
    q0.push_back(q.front());
    q1.push_back(q.back());
  }
  j["q_left"] = q0;
  j["q_right"] = q1;
  const std::vector<double> residuals = identity_residuals(basis);
  j["identity_residuals"] = residuals;

  // The identity is gated on modes whose endpoint values extrapolate stably;
  // the others have an unresolved endpoint boundary layer and are reported.
  double worst = 0.0;
  std::vector<std::size_t> flagged;
  for (std::size_t m = 0; m < basis.modes(); ++m) {
    if (basis.extrapolation_unstable[m])
      flagged.push_back(m);
    else
      worst = std::max(worst, residuals[m]);
  }
  j["extrapolation_unstable_modes"] = flagged;
  j["orthonormality_error"] = orthonormality_error(model, basis);
  j["weyl_constant"] = weyl_constant(model);
  if (basis.modes() >= 16) {
    const GrowthFit fit = eigenvalue_growth(basis);
    j["K_estimate"] = fit.K_estimate;
    j["K_residuals"] = fit.residuals;
  } else {
    j["K_estimate"] = nullptr;
  }

  checks.at_least("lambda_0 positive", basis.eigenvalues[0], 0.0);
  checks.at_most("orthonormality", j["orthonormality_error"].get<double>(), tol["orthonormality"]);
  checks.at_most("identity Q_j lambda_j (stable modes)", worst, tol["identity"]);
  return j;
}

inline std::string eigenfunction_csv(const SpectralBasis& basis) {
  std::ostringstream o;
  o << "x";
  for (std::size_t j = 0; j < basis.modes(); ++j) o << ",phi_" << j;
  o << "\n";
  for (std::size_t i = 0; i < basis.n_interior; ++i) {
    o << num(basis.interior_grid[i]);
    for (std::size_t j = 0; j < basis.modes(); ++j) o << "," << num(basis.phi[j][i]);
    o << "\n";
  }
  return o.str();
}

inline std::string fixation_csv(const FixationProfile& profile) {
  std::ostringstream o;
  o << "x,psi\n";
  for (std::size_t i = 0; i < profile.grid().size(); ++i)
    o << num(profile.grid()[i]) << "," << num(profile.values()[i]) << "\n";
  return o.str();
}

}  // namespace detail

/// `spectrum`: eigenvalues, Q_j, identity residuals and growth estimate.
inline RunResult run_spectrum(const Scenario& sc, const fs::path& out, bool write_eigenfunctions = false) {
  check_resolutions(sc);
  RunResult r;
  const SpectralBasis basis = build_basis(sc.model, sc.modes, sc.grid);
  r.summary = detail::spectrum_json(sc.model, basis, sc.tolerances, r.checks);
  r.summary["checks"] = r.checks.json();
  detail::write_json(out / "spectrum.json", r.summary, r.files);
  if (write_eigenfunctions) detail::write_text(out / "eigenfunctions.csv", detail::eigenfunction_csv(basis), r.files);
  return r;
}

/// `fixation`: psi on the closed spectral grid, its normalization and backward residual.
inline RunResult run_fixation(const Scenario& sc, const fs::path& out) {
  if (sc.grid < 1) throw InputError("fixation: grid must be positive");
  RunResult r;
  const FixationProfile profile = fixation_profile(sc.model, sc.grid + 2);
  const double c_check = normalization_constant(sc.model);
  bool increasing = true;
  for (std::size_t i = 1; i < profile.values().size(); ++i)
    increasing = increasing && profile.values()[i] > profile.values()[i - 1];
  r.summary["c"] = profile.c();
  r.summary["c_independent"] = c_check;
  r.summary["backward_residual"] = backward_residual(sc.model, profile);
  r.summary["points"] = profile.grid().size();
  r.checks.at_most("normalization consistency", std::abs(profile.c() - c_check), 1e-10);
  r.checks.require("psi strictly increasing", increasing);
  r.summary["checks"] = r.checks.json();
  detail::write_text(out / "fixation.csv", detail::fixation_csv(profile), r.files);
  detail::write_json(out / "fixation.json", r.summary, r.files);
  return r;
}

/// Spectral solution with its diagnostics, shared by `evolve` and `verify`.
struct EvolutionRun {
  SpectralSolver solver;
  std::vector<SolutionMeasure> solutions;
  RunResult result;
};

/// `evolve`: the full spectral pipeline for one scenario. Writes spectrum.json,
/// fixation.csv, evolution.csv, q_profiles/q_<k>.csv and summary.json.
inline EvolutionRun run_evolve(const Scenario& sc, const fs::path& out) {
  check_resolutions(sc);
  EvolutionRun run{SpectralSolver(sc.model, sc.initial, sc.modes, sc.grid), {}, {}};
  const SpectralSolver& solver = run.solver;
  const SpectralBasis& basis = solver.basis();
  const LimitMasses& limits = solver.limits();
  const Tolerances& tol = sc.tolerances;
  RunResult& r = run.result;
  const double mass = limits.total_mass;

  nlohmann::json spectrum = detail::spectrum_json(sc.model, basis, tol, r.checks);
  detail::write_json(out / "spectrum.json", spectrum, r.files);
  detail::write_text(out / "fixation.csv", detail::fixation_csv(solver.fixation()), r.files);

  run.solutions = solver.at(sc.times);
  const auto& sols = run.solutions;

  const double lam0 = basis.eigenvalues[0];
  const DecayConstant c0s = decay_constant(basis, sc.s);
  const double ds = ds_norm(solver.coefficients(), basis, sc.s);

  std::ostringstream csv;
  csv << "t,a,b,q_l1,mass_total,psi_mass,radon_to_limit,trunc_error\n";
  double route = 0.0, min_q = 0.0, trunc = 0.0, radon_gap = 0.0;
  bool monotone = true, negative_gap = false;
  nlohmann::json radon_bound = nlohmann::json::array();
  for (std::size_t k = 0; k < sols.size(); ++k) {
    const SolutionMeasure& sol = sols[k];
    const double total = pair_with(basis, sol, [](double) { return 1.0; });
    const double psi_mass = pair_with(basis, sol, [&solver](double x) { return solver.fixation()(x); });
    const RadonDistance rd = radon_distance_to_limit(basis, sol, limits);
    csv << detail::num(sol.t) << "," << detail::num(sol.a) << "," << detail::num(sol.b) << ","
        << detail::num(rd.q_l1) << "," << detail::num(total) << "," << detail::num(psi_mass) << ","
        << detail::num(rd.value) << "," << detail::num(sol.truncation_error) << "\n";

    std::ostringstream qcsv;
    qcsv << "x,q\n";
    for (std::size_t i = 0; i < sol.q_samples.size(); ++i)
      qcsv << detail::num(basis.closed_grid[i]) << "," << detail::num(sol.q_samples[i]) << "\n";
    detail::write_text(out / "q_profiles" / ("q_" + std::to_string(k) + ".csv"), qcsv.str(), r.files);

    negative_gap = negative_gap || rd.negative_gap;
    if (k > 0) monotone = monotone && sol.a >= sols[k - 1].a - 1e-12 * mass && sol.b >= sols[k - 1].b - 1e-12 * mass;
    if (sol.t > 0.0) {
      route = std::max(route, mass_cross_check(basis, solver.fixation(), limits, sol).discrepancy);
      min_q = std::min(min_q, *std::min_element(sol.q_samples.begin(), sol.q_samples.end()));
      trunc = std::max(trunc, sol.truncation_error);
      radon_gap = std::max(radon_gap, std::abs(rd.value - 2.0 * rd.q_l1));
      radon_bound.push_back({{"t", sol.t}, {"radon", rd.value}, {"bound", 2.0 * c0s.value * ds * std::exp(-lam0 * sol.t)}});
    }
  }
  detail::write_text(out / "evolution.csv", csv.str(), r.files);

  // Decay fitted on lambda_0 t in [2, 6], independent of the output times.
  std::vector<double> decay_times;
  for (int k = 0; k <= 4; ++k) decay_times.push_back((2.0 + k) / lam0);
  const DecayDiagnostics decay = decay_diagnostics(basis, solver.coefficients(), decay_times);

  if (sols.size() >= 2) {
    const ConservationResiduals cons = conservation_residuals(basis, solver.fixation(), limits, sols);
    r.summary["mass_drift"] = cons.mass_drift;
    r.summary["psi_mass_drift"] = cons.psi_mass_drift;
    r.checks.at_most("mass conservation", cons.mass_drift, tol["conservation"] * mass);
    r.checks.at_most("psi-mass conservation", cons.psi_mass_drift, tol["conservation"] * mass);
  }
  r.checks.at_most("boundary-mass route agreement", route, tol["route"]);
  r.checks.at_least("positivity of q", min_q, -tol["positivity"] * mass);
  r.checks.at_most("series truncation", trunc, tol["truncation"] * mass);
  r.checks.require("a, b nondecreasing", monotone);
  r.checks.require("no negative mass gaps", !negative_gap);
  r.checks.at_most("radon identity", radon_gap, tol["radon"]);

  r.summary["name"] = sc.name;
  r.summary["model"] = sc.model_spec;
  r.summary["a_inf"] = limits.a_inf;
  r.summary["b_inf"] = limits.b_inf;
  r.summary["total_mass"] = mass;
  r.summary["lambda_0"] = lam0;
  r.summary["C_inf"] = decay.C_inf;
  r.summary["slope"] = decay.slope;
  r.summary["decay_times"] = decay_times;
  r.summary["scaled_l1"] = decay.scaled_l1;
  r.summary["degenerate"] = decay.degenerate;
  r.summary["s"] = sc.s;
  r.summary["ds_norm"] = ds;
  r.summary["C_0s"] = c0s.value;
  r.summary["C_0s_tail_bound"] = c0s.tail_bound;
  r.summary["radon_bound"] = radon_bound;
  r.summary["route_discrepancy"] = route;
  r.summary["min_q"] = min_q;
  r.summary["truncation_error"] = trunc;
  r.summary["checks"] = r.checks.json();
  r.summary["ok"] = r.checks.ok();
  detail::write_json(out / "summary.json", r.summary, r.files);
  return run;
}

/// `verify`: `evolve` plus the finite-volume oracle and the weak-form residuals.
/// Writes verify.json with every difference, drift and verdict.
inline RunResult run_verify(const Scenario& sc, const fs::path& out) {
  EvolutionRun run = run_evolve(sc, out);
  RunResult r;
  r.files = run.result.files;
  const Tolerances& tol = sc.tolerances;
  const double mass = run.solver.limits().total_mass;
  const SpectralBasis& basis = run.solver.basis();

  std::vector<double> times;
  std::vector<SolutionMeasure> spectral;
  for (const SolutionMeasure& sol : run.solutions)
    if (sol.t > 0.0) {
      times.push_back(sol.t);
      spectral.push_back(sol);
    }

  nlohmann::json fd_json = nlohmann::json::array();
  if (!times.empty()) {
    FdOptions opts;
    opts.n_cells = sc.cells;
    opts.dt = sc.dt;
    const std::vector<FdState> fd = evolve_fd(sc.model, sc.initial, times, opts);
    const std::vector<FdComparison> cmp = compare_with_spectral(basis, fd, spectral);
    std::vector<FdComparison> coarse_cmp;
    if (sc.cells / 2 >= 128) {
      FdOptions coarse = opts;
      coarse.n_cells = sc.cells / 2;
      coarse.dt = sc.dt > 0.0 ? 2.0 * sc.dt : 0.0;
      coarse_cmp = compare_with_spectral(basis, evolve_fd(sc.model, sc.initial, times, coarse), spectral);
    }
    double l1 = 0.0, dab = 0.0;
    for (std::size_t k = 0; k < cmp.size(); ++k) {
      nlohmann::json row = {{"t", cmp[k].t}, {"q_l1_diff", cmp[k].q_l1_diff}, {"a_diff", cmp[k].a_diff},
                            {"b_diff", cmp[k].b_diff}, {"fd_mass_drift", fd[k].mass_drift}};
      if (!coarse_cmp.empty()) row["ratio_vs_half_cells"] = coarse_cmp[k].q_l1_diff / cmp[k].q_l1_diff;
      fd_json.push_back(row);
      l1 = std::max(l1, cmp[k].q_l1_diff);
      dab = std::max({dab, cmp[k].a_diff, cmp[k].b_diff});
    }
    r.checks.at_most("spectral vs FD L1 gap", l1, tol["fd_l1"]);
    r.checks.at_most("spectral vs FD boundary masses", dab, tol["fd_mass"]);
    r.checks.at_most("FD discrete mass drift", fd.back().mass_drift, tol["fd_drift"] * mass);
  }

  const auto residuals = verify_weak_form(run.solver, default_time_bumps(),
                                          default_space_factors(sc.model, run.solver.fixation()));
  nlohmann::json weak = nlohmann::json::array();
  double worst = 0.0;
  for (const auto& w : residuals) {
    weak.push_back({{"zeta", w.time_factor}, {"chi", w.space_factor}, {"residual", w.residual}});
    worst = std::max(worst, w.residual);
  }
  r.checks.at_most("weak-form residual", worst, tol["weak_form"] * mass);

  r.summary["name"] = sc.name;
  r.summary["evolve_checks"] = run.result.checks.json();
  r.summary["fd"] = fd_json;
  r.summary["fd_cells"] = sc.cells;
  r.summary["weak_form"] = weak;
  r.summary["checks"] = r.checks.json();
  const bool ok = run.result.checks.ok() && r.checks.ok();
  std::vector<std::string> failed = run.result.checks.failures();
  for (const auto& f : r.checks.failures()) failed.push_back(f);
  r.summary["failed"] = failed;
  r.summary["verdict"] = ok ? "pass" : "fail";
  detail::write_json(out / "verify.json", r.summary, r.files);
  if (!run.result.checks.ok())
    for (const auto& f : run.result.checks.failures()) r.checks.require(f, false);
  return r;
}

/// `bessel-check`: Liouville-Green comparison for the given modes plus the
/// boundedness trends of ||phi_j||, ||q_j|| lambda^{-3/4} and |Q_j| lambda^{1/4}.
inline RunResult run_bessel(const Scenario& sc, const fs::path& out, std::vector<std::size_t> modes = {4, 8, 16}) {
  check_resolutions(sc);
  std::sort(modes.begin(), modes.end());
  RunResult r;
  const SpectralBasis basis = build_basis(sc.model, sc.modes, sc.grid);
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> errors;
  for (std::size_t j : modes) {
    if (j >= basis.modes()) throw InputError("bessel-check: mode " + std::to_string(j) + " exceeds --modes");
    const BesselComparison c = bessel_comparison(sc.model, basis, j);
    rows.push_back({{"mode", j}, {"sup_error", c.sup_error}, {"phi_sup", c.phi_sup}, {"amplitude", c.amplitude}});
    errors.push_back(c.sup_error);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < errors.size(); ++k) decreasing = decreasing && errors[k] < errors[k - 1];
  r.checks.require("sup error decreases with j", decreasing);

  const AsymptoticProfile prof = asymptotic_profile(basis);
  r.summary["comparison"] = rows;
  r.summary["phi_sup_max"] = detail::max_of(prof.phi_sup);
  r.summary["phi_sup_slope"] = loglog_slope(prof.phi_sup);
  r.summary["q_sup_scaled_max"] = detail::max_of(prof.q_sup_scaled);
  r.summary["q_sup_scaled_slope"] = loglog_slope(prof.q_sup_scaled);
  r.summary["Q_scaled_max"] = detail::max_of(prof.Q_scaled);
  r.summary["Q_scaled_slope"] = loglog_slope(prof.Q_scaled);
  r.summary["checks"] = r.checks.json();
  detail::write_json(out / "bessel.json", r.summary, r.files);
  return r;
}

namespace detail {

/// Header and numeric rows of a CSV file written by run_evolve.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("missing file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("malformed number '" + cell + "' in '" + path.string() + "'");
      }
    }
    if (row.size() != header.size()) throw InputError("ragged row in '" + path.string() + "'");
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

}  // namespace detail

/// `plot`: long-format series and one SVG chart per series from an `evolve` results directory.
inline RunResult run_plot(const fs::path& results) {
  const fs::path summary_path = results / "summary.json";
  const auto [header, rows] = detail::read_csv(results / "evolution.csv");
  std::ifstream sin(summary_path);
  if (!sin) throw InputError("missing file '" + summary_path.string() + "'");
  nlohmann::json summary;
  try {
    sin >> summary;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + summary_path.string() + "' is not valid JSON: " + e.what());
  }
  if (!summary.contains("lambda_0")) throw InputError("'" + summary_path.string() + "' lacks lambda_0");
  const double lam0 = summary["lambda_0"].get<double>();

  auto column = [&header = header, &rows = rows](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("evolution.csv lacks column '" + name + "'");
    const std::size_t c = static_cast<std::size_t>(it - header.begin());
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row[c]);
    return v;
  };
  const std::vector<double> t = column("t");
  if (t.empty()) throw InputError("evolution.csv has no rows");
  std::vector<double> scaled = column("q_l1");
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] *= std::exp(lam0 * t[k]);

  const std::vector<svg::Series> series = {
      {"a(t): mass absorbed at 0", "t", "a", t, column("a")},
      {"b(t): mass absorbed at 1", "t", "b", t, column("b")},
      {"interior mass ||q(t)||_1", "t", "q_l1", t, column("q_l1")},
      {"exp(lambda_0 t) ||q(t)||_1", "t", "scaled_l1", t, scaled},
  };
  RunResult r;
  std::ostringstream long_csv;
  long_csv << "series,t,value\n";
  for (const svg::Series& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k)
      long_csv << s.y_label << "," << detail::num(s.x[k]) << "," << detail::num(s.y[k]) << "\n";
    detail::write_text(results / (s.y_label + ".svg"), svg::line_chart(s), r.files);
  }
  detail::write_text(results / "plot_series.csv", long_csv.str(), r.files);
  r.summary["files"] = r.files;
  return r;
}

}  // namespace kimura
