#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kimura/kimura.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::size_t> modes, grid, cells;
  std::optional<double> dt, s;
  std::map<std::string, double> tolerances;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (default: output_dir from the config)");
  cmd->add_option("--modes", o.modes, "number of spectral modes");
  cmd->add_option("--grid", o.grid, "interior points of the spectral grid");
  cmd->add_option("--cells", o.cells, "finite-volume cells");
  cmd->add_option("--dt", o.dt, "finite-volume time step (default h)");
  cmd->add_option("--s", o.s, "smoothness index of the D_s norm");
  for (const auto& [key, value] : kimura::Tolerances{}.values) {
    std::string flag = "--tol-" + key;
    for (char& c : flag)
      if (c == '_') c = '-';
    cmd->add_option_function<double>(flag, [&o, key = key](double v) { o.tolerances[key] = v; },
                                     "tolerance '" + key + "' (default " + std::to_string(value) + ")");
  }
}

kimura::Scenario scenario_from(const Overrides& o) {
  kimura::Scenario sc = kimura::load_scenario(o.config);
  if (o.modes) sc.modes = *o.modes;
  if (o.grid) sc.grid = *o.grid;
  if (o.cells) sc.cells = *o.cells;
  if (o.dt) sc.dt = *o.dt;
  if (o.s) sc.s = *o.s;
  for (const auto& [k, v] : o.tolerances) sc.tolerances.values[k] = v;
  if (!o.out.empty()) sc.output_dir = o.out;
  return sc;
}

int report(const std::string& command, const kimura::RunResult& r) {
  for (const auto& f : r.checks.failures()) std::fprintf(stderr, "%s: check failed: %s\n", command.c_str(), f.c_str());
  for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and finite-volume solver for degenerate Kimura-type diffusions"};
  app.require_subcommand(1);

  Overrides o;
  bool eigenfunctions = false;
  std::vector<std::size_t> bessel_modes = {4, 8, 16};
  std::string results;

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, Q_j, identity residuals, growth estimate");
  add_common(spectrum, o);
  spectrum->add_flag("--eigenfunctions", eigenfunctions, "also write eigenfunctions.csv");
  auto* fixation = app.add_subcommand("fixation", "fixation probability psi as CSV");
  add_common(fixation, o);
  auto* evolve = app.add_subcommand("evolve", "spectral solution, boundary masses and diagnostics");
  add_common(evolve, o);
  auto* verify = app.add_subcommand("verify", "evolve plus finite-volume and weak-form cross-checks");
  add_common(verify, o);
  auto* bessel = app.add_subcommand("bessel-check", "Liouville-Green comparison of eigenfunctions");
  add_common(bessel, o);
  bessel->add_option("--mode", bessel_modes, "mode indices to compare (>= 4)");
  auto* plot = app.add_subcommand("plot", "plot-ready series and SVG charts from evolve results");
  plot->add_option("--out", results, "results directory written by evolve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kimura::kExitOk : kimura::kExitInput;
  }

  try {
    if (*plot) return report("plot", kimura::run_plot(results));
    const kimura::Scenario sc = scenario_from(o);
    if (*spectrum) return report("spectrum", kimura::run_spectrum(sc, sc.output_dir, eigenfunctions));
    if (*fixation) return report("fixation", kimura::run_fixation(sc, sc.output_dir));
    if (*evolve) return report("evolve", kimura::run_evolve(sc, sc.output_dir).result);
    if (*verify) return report("verify", kimura::run_verify(sc, sc.output_dir));
    if (*bessel) return report("bessel-check", kimura::run_bessel(sc, sc.output_dir, bessel_modes));
  } catch (const kimura::InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kimura::kExitInput;
  } catch (const kimura::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kimura::kExitViolation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kimura::kExitInput;
  }
  return kimura::kExitInput;
}
