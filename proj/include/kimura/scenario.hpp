#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kimura/errors.hpp"
#include "kimura/initial_measure.hpp"
#include "kimura/model.hpp"

namespace kimura {

inline constexpr int kSchemaVersion = 1;

/// Named tolerances; every key can be overridden from the command line as --tol-<key>.
struct Tolerances {
  std::map<std::string, double> values = {
      {"conservation", 1e-5},    // mass and psi-mass drift, relative to the initial mass
      {"route", 1e-5},           // series vs conservation route for a, b
      {"positivity", 1e-8},      // allowed undershoot of q, relative to the initial mass
      {"truncation", 1e-6},      // series truncation estimate, relative to the initial mass
      {"orthonormality", 1e-6},  // Gram matrix deviation
      {"identity", 1e-4},        // Q_j lambda_j = Psi(0) q_j(0) + Psi(1) q_j(1), relative
      {"radon", 1e-8},           // |rho - 2 ||q||_1|
      {"weak_form", 1e-5},       // weak-form residual
      {"fd_l1", 1e-3},           // spectral vs FD L1 gap of q
      {"fd_mass", 1e-3},         // spectral vs FD |da|, |db|
      {"fd_drift", 1e-10},       // FD discrete mass drift, relative to the initial mass
  };

  double operator[](const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw InputError("unknown tolerance '" + key + "'");
    return it->second;
  }
};

/// One self-describing run: model, initial data, output times, resolutions and tolerances.
struct Scenario {
  std::string name = "scenario";
  nlohmann::json model_spec;
  CoefficientModel model = make_kimura(0.0, 0.0);
  InitialMeasure initial;
  std::vector<double> times = {0.0, 0.1, 0.5, 1.0, 2.0};
  std::size_t modes = 64;
  std::size_t grid = 2048;
  std::size_t cells = 1024;
  double dt = 0.0;  // 0 means dt = h
  double s = 1.0;
  Tolerances tolerances;
  std::string output_dir = "results";
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
  throw InputError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
}

inline double get_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  return j.get<double>();
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) config_error(path, "expected a positive integer");
  const auto v = j.get<long long>();
  if (v <= 0) config_error(path, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> get_numbers(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline void reject_unknown(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) config_error(path + "/" + item.key(), "unknown field");
  }
}

inline CoefficientModel parse_model(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  if (j.contains("preset")) {
    reject_unknown(j, path, {"preset", "eta", "beta"});
    if (j["preset"] != "kimura") config_error(path + "/preset", "only \"kimura\" is supported");
    const double eta = j.contains("eta") ? get_number(j["eta"], path + "/eta") : 0.0;
    const double beta = j.contains("beta") ? get_number(j["beta"], path + "/beta") : 0.0;
    return make_kimura(eta, beta);
  }
  reject_unknown(j, path, {"psi", "pi"});
  if (!j.contains("psi")) config_error(path, "needs either \"preset\" or \"psi\"/\"pi\"");
  const std::vector<double> psi = get_numbers(j["psi"], path + "/psi");
  const std::vector<double> pi = j.contains("pi") ? get_numbers(j["pi"], path + "/pi") : std::vector<double>{0.0};
  if (psi.empty()) config_error(path + "/psi", "needs at least one coefficient");
  try {
    return CoefficientModel(Polynomial(psi), Polynomial(pi));
  } catch (const InputError& e) {
    config_error(path, e.what());
  }
}

inline Density parse_density(const nlohmann::json& j, const std::string& path) {
  if (j.is_string() && j == "none") return UniformDensity{0.0};
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    config_error(path, "expected \"none\" or an object with a \"type\" field");
  const std::string type = j["type"];
  if (type == "uniform") {
    reject_unknown(j, path, {"type", "height"});
    return UniformDensity{j.contains("height") ? get_number(j["height"], path + "/height") : 1.0};
  }
  if (type == "bump") {
    reject_unknown(j, path, {"type", "center", "width", "mass"});
    BumpDensity b;
    if (j.contains("center")) b.center = get_number(j["center"], path + "/center");
    if (j.contains("width")) b.width = get_number(j["width"], path + "/width");
    if (j.contains("mass")) b.mass = get_number(j["mass"], path + "/mass");
    return b;
  }
  if (type == "samples") {
    reject_unknown(j, path, {"type", "x", "values"});
    if (!j.contains("x") || !j.contains("values")) config_error(path, "samples need \"x\" and \"values\"");
    return SampledDensity{get_numbers(j["x"], path + "/x"), get_numbers(j["values"], path + "/values")};
  }
  config_error(path + "/type", "unknown density type \"" + type + "\"");
}

inline InitialMeasure parse_initial(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  reject_unknown(j, path, {"a0", "b0", "density", "atoms"});
  InitialMeasure init;
  if (j.contains("a0")) init.a0 = get_number(j["a0"], path + "/a0");
  if (j.contains("b0")) init.b0 = get_number(j["b0"], path + "/b0");
  if (j.contains("density")) init.density = parse_density(j["density"], path + "/density");
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) config_error(path + "/atoms", "expected an array");
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
      const std::string p = path + "/atoms/" + std::to_string(i);
      const auto& a = j["atoms"][i];
      if (!a.is_object() || !a.contains("x") || !a.contains("mass")) config_error(p, "expected {\"x\", \"mass\"}");
      init.atoms.push_back({get_number(a["x"], p + "/x"), get_number(a["mass"], p + "/mass")});
    }
  }
  try {
    init.validate();
  } catch (const InputError& e) {
    config_error(path, e.what());
  }
  return init;
}

}  // namespace detail

/// Parses and validates a scenario. Errors name the offending field path.
inline Scenario parse_scenario(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) config_error("", "expected a JSON object");
  reject_unknown(j, "", {"schema_version", "name", "model", "initial", "times", "spectral", "fd", "s", "tolerances",
                         "output_dir"});
  if (!j.contains("schema_version")) config_error("/schema_version", "missing");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    config_error("/schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

  Scenario sc;
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_error("/name", "expected a string");
    sc.name = j["name"];
  }
  if (!j.contains("model")) config_error("/model", "missing");
  sc.model_spec = j["model"];
  sc.model = parse_model(j["model"], "/model");
  if (j.contains("initial")) sc.initial = parse_initial(j["initial"], "/initial");
  else config_error("/initial", "missing");

  if (j.contains("times")) sc.times = get_numbers(j["times"], "/times");
  if (sc.times.empty()) config_error("/times", "needs at least one time");
  for (std::size_t i = 0; i < sc.times.size(); ++i) {
    const bool ok = i == 0 ? sc.times[i] >= 0.0 : sc.times[i] > sc.times[i - 1];
    if (!ok) config_error("/times/" + std::to_string(i), "times must be nonnegative and strictly increasing");
  }

  if (j.contains("spectral")) {
    const auto& sp = j["spectral"];
    reject_unknown(sp, "/spectral", {"modes", "grid"});
    if (sp.contains("modes")) sc.modes = get_count(sp["modes"], "/spectral/modes");
    if (sp.contains("grid")) sc.grid = get_count(sp["grid"], "/spectral/grid");
  }
  if (j.contains("fd")) {
    const auto& fd = j["fd"];
    reject_unknown(fd, "/fd", {"cells", "dt"});
    if (fd.contains("cells")) sc.cells = get_count(fd["cells"], "/fd/cells");
    if (fd.contains("dt") && !fd["dt"].is_null()) sc.dt = get_number(fd["dt"], "/fd/dt");
  }
  if (j.contains("s")) sc.s = get_number(j["s"], "/s");
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) config_error("/tolerances", "expected an object");
    for (const auto& item : j["tolerances"].items()) {
      const std::string p = "/tolerances/" + item.key();
      if (!sc.tolerances.values.count(item.key())) config_error(p, "unknown tolerance");
      sc.tolerances.values[item.key()] = get_number(item.value(), p);
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) config_error("/output_dir", "expected a string");
    sc.output_dir = j["output_dir"];
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

/// Resolution and tolerance checks that depend on more than one field.
inline void check_resolutions(const Scenario& sc) {
  if (sc.grid < 64) detail::config_error("/spectral/grid", "must be >= 64");
  if (sc.modes > sc.grid / 8) detail::config_error("/spectral/modes", "must be <= grid/8");
  if (sc.cells < 128) detail::config_error("/fd/cells", "must be >= 128");
  if (sc.dt < 0.0 || sc.dt > 1.0 / static_cast<double>(sc.cells)) detail::config_error("/fd/dt", "must be in (0, h]");
  if (!(sc.s >= 0.0)) detail::config_error("/s", "must be >= 0");
  for (const auto& [k, v] : sc.tolerances.values)
    if (!(v > 0.0)) detail::config_error("/tolerances/" + k, "must be > 0");
}

}  // namespace kimura
