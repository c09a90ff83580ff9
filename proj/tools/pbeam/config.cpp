#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pbeam/error.hpp"

namespace pbeam::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

const json* section(const json& doc, const char* key) {
  if (!doc.contains(key)) return nullptr;
  const json& s = doc.at(key);
  if (!s.is_object()) fail(std::string(key) + " must be an object");
  return &s;
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key + " has the wrong type");
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail("missing " + where + "." + key);
  return get<T>(obj, key, where, T{});
}

SineTerm sine_term(const json& obj, const char* key) {
  const std::string where = std::string("coefficients.") + key;
  if (!obj.contains(key)) return {};
  const json& s = obj.at(key);
  if (s.is_number()) return {s.get<double>(), 0.0, 1.0, 0.0};
  if (!s.is_object()) fail(where + " must be a number or an object");
  return {get<double>(s, "mean", where, 0.0), get<double>(s, "amplitude", where, 0.0),
          get<double>(s, "frequency", where, 1.0), get<double>(s, "phase", where, 0.0)};
}

std::function<double(double)> interpolant(std::vector<double> samples, const char* key) {
  if (samples.size() < 2) fail(std::string("coefficients.") + key + " needs at least 2 samples");
  return [s = std::move(samples)](double x) {
    const double h = std::numbers::pi / static_cast<double>(s.size() - 1);
    const double r = std::clamp(x / h, 0.0, static_cast<double>(s.size() - 1));
    const size_t i = std::min(static_cast<size_t>(r), s.size() - 2);
    const double t = r - static_cast<double>(i);
    return (1.0 - t) * s[i] + t * s[i + 1];
  };
}

void parse_coefficients(const json& c, Config& cfg) {
  const std::string where = "coefficients";
  cfg.preset = get<std::string>(c, "preset", where, "constant");
  cfg.recipe.rho0 = get<double>(c, "rho0", where, 1.0);
  cfg.recipe.strict_a2 = get<bool>(c, "strict_a2", where, false);
  cfg.recipe.calibrate = get<bool>(c, "calibrate", where, false);
  if (cfg.preset == "constant") {
    cfg.recipe.functions = constant_preset();
  } else if (cfg.preset == "exp-linear") {
    cfg.recipe.functions =
        exp_linear_preset(get<double>(c, "alpha", where, 0.0), get<double>(c, "beta", where, 0.0));
  } else if (cfg.preset == "sine-perturbed") {
    cfg.recipe.functions = sine_perturbed_preset(sine_term(c, "alpha"), sine_term(c, "beta"));
  } else if (cfg.preset == "samples") {
    cfg.alpha_samples = require<std::vector<double>>(c, "alpha", where);
    cfg.beta_samples = require<std::vector<double>>(c, "beta", where);
    cfg.recipe.functions = {interpolant(cfg.alpha_samples, "alpha"),
                            interpolant(cfg.beta_samples, "beta")};
  } else {
    fail("unknown coefficients.preset '" + cfg.preset + "'");
  }
}

ModeTerm parse_term(const json& t, size_t i) {
  const std::string where = "forcing.terms[" + std::to_string(i) + "]";
  if (!t.is_object()) fail(where + " must be an object");
  ModeTerm m{require<int>(t, "m", where), require<int>(t, "n", where),
             get<double>(t, "cos", where, 0.0), get<double>(t, "sin", where, 0.0)};
  if (m.m < 0) fail(where + ".m must be >= 0 (conjugate modes are implied)");
  if (m.n < 1) fail(where + ".n must be >= 1");
  return m;
}

void parse_solver(const json& s, SolverConfig& cfg) {
  const std::string w = "solver";
  cfg.tol = get<double>(s, "tol", w, cfg.tol);
  cfg.max_iters = get<int>(s, "max_iters", w, cfg.max_iters);
  cfg.eps_start = get<double>(s, "eps_start", w, cfg.eps_start);
  cfg.eps_end = get<double>(s, "eps_end", w, cfg.eps_end);
  cfg.eps_ratio = get<double>(s, "eps_ratio", w, cfg.eps_ratio);
  cfg.limit_tol = get<double>(s, "limit_tol", w, cfg.limit_tol);
  cfg.final_tol = get<double>(s, "final_tol", w, cfg.final_tol);
  cfg.waive_a3 = get<bool>(s, "waive_a3", w, cfg.waive_a3);
  cfg.limit_polish = get<bool>(s, "limit_polish", w, cfg.limit_polish);
  cfg.blowup_factor = get<double>(s, "blowup_factor", w, cfg.blowup_factor);
  if (cfg.tol <= 0 || cfg.max_iters < 1 || cfg.limit_tol <= 0 || cfg.final_tol <= 0) {
    fail("solver tolerances and max_iters must be positive");
  }
  try {
    (void)cfg.schedule();
  } catch (const Error& e) {
    fail(std::string("solver: ") + e.what());
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Nonlinearity Config::make_nonlinearity() const {
  if (nonlinearity == "zero") return zero_nonlinearity();
  if (nonlinearity == "tanh") return tanh_nonlinearity(g_amplitude, g_slope);
  if (nonlinearity == "arctan") return arctan_nonlinearity(g_amplitude, g_slope);
  throw Error(ErrorCode::ConfigError, "unknown nonlinearity.type '" + nonlinearity + "'");
}

Config parse_config(const json& doc) {
  if (!doc.is_object()) fail("config root must be an object");
  Config cfg;
  const int version = get<int>(doc, "schema_version", "", -1);
  if (version != kSchemaVersion) {
    fail("schema_version must be " + std::to_string(kSchemaVersion));
  }
  cfg.hash = fnv1a_hex(doc.dump());
  cfg.seed = get<std::uint64_t>(doc, "seed", "", 0);

  if (const json* c = section(doc, "coefficients")) {
    parse_coefficients(*c, cfg);
  } else {
    cfg.recipe.functions = constant_preset();
  }

  if (const json* d = section(doc, "discretization")) {
    cfg.resolution = get<int>(*d, "resolution", "discretization", cfg.resolution);
    cfg.modes = get<int>(*d, "modes", "discretization", cfg.modes);
    cfg.fit_min = get<int>(*d, "fit_min", "discretization", cfg.fit_min);
  }
  if (cfg.resolution < 1) fail("discretization.resolution must be >= 1");
  if (cfg.modes < 1) fail("discretization.modes must be >= 1");

  if (const json* f = section(doc, "frequency")) {
    const int p = require<int>(*f, "p", "frequency");
    const int q = require<int>(*f, "q", "frequency");
    const int m_max = require<int>(*f, "m_max", "frequency");
    try {
      cfg.frequency = FrequencySpec::make(p, q, m_max);
    } catch (const Error& e) {
      fail(std::string("frequency: ") + e.what());
    }
  }

  if (const json* l = section(doc, "lattice")) {
    if (l->contains("null_tol")) cfg.null_tol = get<double>(*l, "null_tol", "lattice", 0.0);
    cfg.bound_trials = get<int>(*l, "bound_trials", "lattice", cfg.bound_trials);
    cfg.compactness_ranks =
        get<std::vector<int>>(*l, "compactness_ranks", "lattice", cfg.compactness_ranks);
  }
  if (const json* d = section(doc, "diagnostics")) {
    cfg.convergence_resolutions = get<std::vector<int>>(
        *d, "convergence_resolutions", "diagnostics", cfg.convergence_resolutions);
  }

  if (const json* g = section(doc, "nonlinearity")) {
    cfg.nonlinearity = get<std::string>(*g, "type", "nonlinearity", cfg.nonlinearity);
    cfg.g_amplitude = get<double>(*g, "amplitude", "nonlinearity", cfg.g_amplitude);
    cfg.g_slope = get<double>(*g, "slope", "nonlinearity", cfg.g_slope);
    (void)cfg.make_nonlinearity();
  }

  if (const json* f = section(doc, "forcing")) {
    cfg.forcing.type = get<std::string>(*f, "type", "forcing", "modes");
    if (cfg.forcing.type != "none" && cfg.forcing.type != "modes" &&
        cfg.forcing.type != "manufactured") {
      fail("unknown forcing.type '" + cfg.forcing.type + "'");
    }
    cfg.forcing.density_scaled = get<bool>(*f, "density_scaled", "forcing", false);
    cfg.forcing.margin = get<double>(*f, "margin", "forcing", cfg.forcing.margin);
    if (!(cfg.forcing.margin > 0.0)) fail("forcing.margin must be positive");
    if (f->contains("terms")) {
      const json& terms = f->at("terms");
      if (!terms.is_array()) fail("forcing.terms must be an array");
      for (size_t i = 0; i < terms.size(); ++i) cfg.forcing.terms.push_back(parse_term(terms[i], i));
    }
  }

  if (const json* s = section(doc, "solver")) parse_solver(*s, cfg.solver);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace pbeam::cli
