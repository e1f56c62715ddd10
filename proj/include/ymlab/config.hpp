#pragma once

// Run configuration: flat sectioned text, `key = value` pairs, `#` comments.
// Unknown sections or keys are rejected with line diagnostics; no code
// execution.  The full schema with defaults is documented in the README.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ymlab/flow.hpp"
#include "ymlab/monitors.hpp"

namespace ymlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // [run]
  std::string mode = "ym";  // ym | hym
  std::string name = "run";

  // [geometry]
  int n = 0;
  std::vector<int> sizes;
  double spacing = 0.0;

  // [bundle]
  int rank = 1;
  std::string kind = "complex";  // real | complex
  std::string twist = "none";    // none | clock_shift
  int twist_mu = 0, twist_nu = 1;
  std::vector<std::array<int, 3>> chern;  // (mu, nu, k)

  // [initial]
  std::string initial_kind = "zero";  // zero | random | bump | file
  double amplitude = 0.0;
  double scale = 0.0;           // bump width
  std::vector<double> center;   // bump center (absolute); empty = torus middle
  std::uint64_t seed = 1;
  std::string initial_file;

  // [flow]
  FlowConfig flow;

  // [hym]
  bool normalize_metric = true;  // run conformal_normalize before the flow
  double eig_floor = 1e-12;

  // [monitor]
  MonitorConfig monitor;
  bool monitors_enabled = true;

  // [output]
  std::string csv = "series.csv";
  std::string summary = "summary.txt";
  std::string checkpoint;      // empty = no checkpoints
  int checkpoint_interval = 0;  // in monitor samples; 0 = off
  int threads = 1;

  std::string text;  // the raw config this was parsed from
};

namespace config_detail {

struct Entry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

using SectionMap = std::map<std::string, std::map<std::string, Entry>>;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline SectionMap parse_sections(const std::string& text) {
  SectionMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": key outside any [section]");
    auto& sec = out[section];
    if (sec.count(key) && key != "chern")
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    // repeatable key: collect chern declarations under numbered aliases
    std::string stored = key;
    if (key == "chern") {
      int idx = 0;
      while (sec.count(stored)) stored = "chern#" + std::to_string(++idx);
    }
    sec[stored] = Entry{value, lineno, false};
  }
  return out;
}

struct Cursor {
  const SectionMap& sections;

  const Entry* find(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  template <typename F>
  void for_each_with_prefix(const std::string& sec, const std::string& prefix,
                            F&& fn) const {
    const auto s = sections.find(sec);
    if (s == sections.end()) return;
    for (const auto& [key, entry] : s->second) {
      if (key.rfind(prefix, 0) == 0) {
        entry.used = true;
        fn(entry);
      }
    }
  }

  void reject_unused(const std::set<std::string>& known_sections) const {
    for (const auto& [sec, entries] : sections) {
      if (!known_sections.count(sec))
        throw ConfigError("unknown section [" + sec + "]");
      for (const auto& [key, entry] : entries)
        if (!entry.used)
          throw ConfigError("line " + std::to_string(entry.line) +
                            ": unknown key '" + key + "' in [" + sec + "]");
    }
  }
};

inline double parse_double(const Entry& e, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + what +
                      " expects a number, got '" + e.value + "'");
  }
}

inline long long parse_int(const Entry& e, const std::string& what) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(e.line) + ": " + what +
                      " expects an integer, got '" + e.value + "'");
  }
}

inline bool parse_bool(const Entry& e, const std::string& what) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError("line " + std::to_string(e.line) + ": " + what +
                    " expects true/false");
}

template <typename T, typename F>
std::vector<T> parse_list(const Entry& e, const std::string& what, F&& one) {
  std::vector<T> out;
  std::istringstream in(e.value);
  std::string tok;
  while (in >> tok) {
    Entry fake{tok, e.line, true};
    out.push_back(one(fake, what));
  }
  if (out.empty())
    throw ConfigError("line " + std::to_string(e.line) + ": " + what +
                      " expects a list");
  return out;
}

}  // namespace config_detail

inline RunConfig parse_run_config(const std::string& text) {
  using namespace config_detail;
  RunConfig cfg;
  cfg.text = text;
  const SectionMap sections = parse_sections(text);
  const Cursor c{sections};

  if (const auto* e = c.find("run", "mode")) {
    cfg.mode = e->value;
    if (cfg.mode != "ym" && cfg.mode != "hym")
      throw ConfigError("line " + std::to_string(e->line) +
                        ": mode must be ym or hym");
  }
  if (const auto* e = c.find("run", "name")) cfg.name = e->value;

  const auto* en = c.find("geometry", "n");
  const auto* es = c.find("geometry", "sizes");
  const auto* ea = c.find("geometry", "spacing");
  if (!en || !es || !ea)
    throw ConfigError("[geometry] needs n, sizes, spacing");
  cfg.n = static_cast<int>(parse_int(*en, "n"));
  cfg.sizes = parse_list<int>(*es, "sizes", [](const Entry& e, const std::string& w) {
    return static_cast<int>(parse_int(e, w));
  });
  cfg.spacing = parse_double(*ea, "spacing");

  if (const auto* e = c.find("bundle", "rank"))
    cfg.rank = static_cast<int>(parse_int(*e, "rank"));
  if (const auto* e = c.find("bundle", "kind")) {
    cfg.kind = e->value;
    if (cfg.kind != "real" && cfg.kind != "complex")
      throw ConfigError("line " + std::to_string(e->line) +
                        ": kind must be real or complex");
  }
  if (const auto* e = c.find("bundle", "twist")) {
    cfg.twist = e->value;
    if (cfg.twist != "none" && cfg.twist != "clock_shift")
      throw ConfigError("line " + std::to_string(e->line) +
                        ": twist must be none or clock_shift");
  }
  if (const auto* e = c.find("bundle", "twist_axes")) {
    const auto axes = parse_list<int>(*e, "twist_axes",
                                      [](const Entry& q, const std::string& w) {
                                        return static_cast<int>(parse_int(q, w));
                                      });
    if (axes.size() != 2)
      throw ConfigError("line " + std::to_string(e->line) +
                        ": twist_axes expects two axes");
    cfg.twist_mu = axes[0];
    cfg.twist_nu = axes[1];
  }
  c.for_each_with_prefix("bundle", "chern", [&](const Entry& e) {
    const auto v = parse_list<int>(e, "chern", [](const Entry& q, const std::string& w) {
      return static_cast<int>(parse_int(q, w));
    });
    if (v.size() != 3)
      throw ConfigError("line " + std::to_string(e.line) +
                        ": chern expects 'mu nu k'");
    cfg.chern.push_back({v[0], v[1], v[2]});
  });

  if (const auto* e = c.find("initial", "kind")) {
    cfg.initial_kind = e->value;
    if (cfg.initial_kind != "zero" && cfg.initial_kind != "random" &&
        cfg.initial_kind != "bump" && cfg.initial_kind != "file")
      throw ConfigError("line " + std::to_string(e->line) +
                        ": initial kind must be zero|random|bump|file");
  }
  if (const auto* e = c.find("initial", "amplitude"))
    cfg.amplitude = parse_double(*e, "amplitude");
  if (const auto* e = c.find("initial", "scale"))
    cfg.scale = parse_double(*e, "scale");
  if (const auto* e = c.find("initial", "center"))
    cfg.center = parse_list<double>(*e, "center", parse_double);
  if (const auto* e = c.find("initial", "seed"))
    cfg.seed = static_cast<std::uint64_t>(parse_int(*e, "seed"));
  if (const auto* e = c.find("initial", "file")) cfg.initial_file = e->value;

  if (const auto* e = c.find("flow", "scheme"))
    cfg.flow.scheme = flow_scheme_from(e->value);
  if (const auto* e = c.find("flow", "dt_init"))
    cfg.flow.dt_init = parse_double(*e, "dt_init");
  if (const auto* e = c.find("flow", "dt_min"))
    cfg.flow.dt_min = parse_double(*e, "dt_min");
  if (const auto* e = c.find("flow", "dt_max"))
    cfg.flow.dt_max = parse_double(*e, "dt_max");
  if (const auto* e = c.find("flow", "safety"))
    cfg.flow.safety = parse_double(*e, "safety");
  if (const auto* e = c.find("flow", "tolerance"))
    cfg.flow.tolerance = parse_double(*e, "tolerance");
  if (const auto* e = c.find("flow", "t_end"))
    cfg.flow.t_end = parse_double(*e, "t_end");
  if (const auto* e = c.find("flow", "gtol"))
    cfg.flow.gtol = parse_double(*e, "gtol");

  if (const auto* e = c.find("hym", "normalize"))
    cfg.normalize_metric = parse_bool(*e, "normalize");
  if (const auto* e = c.find("hym", "eig_floor"))
    cfg.eig_floor = parse_double(*e, "eig_floor");

  if (const auto* e = c.find("monitor", "enabled"))
    cfg.monitors_enabled = parse_bool(*e, "enabled");
  if (const auto* e = c.find("monitor", "eps0"))
    cfg.monitor.eps0 = parse_double(*e, "eps0");
  if (const auto* e = c.find("monitor", "delta0"))
    cfg.monitor.delta0 = parse_double(*e, "delta0");
  if (const auto* e = c.find("monitor", "sigma1"))
    cfg.monitor.sigma1 = parse_double(*e, "sigma1");
  if (const auto* e = c.find("monitor", "radii"))
    cfg.monitor.radii = parse_list<double>(*e, "radii", parse_double);
  if (const auto* e = c.find("monitor", "cadence"))
    cfg.monitor.cadence = static_cast<int>(parse_int(*e, "cadence"));
  if (const auto* e = c.find("monitor", "window"))
    cfg.monitor.window = static_cast<int>(parse_int(*e, "window"));
  if (const auto* e = c.find("monitor", "detector_sup_fraction"))
    cfg.monitor.detector_sup_fraction = parse_double(*e, "detector_sup_fraction");
  if (const auto* e = c.find("monitor", "gtol"))
    cfg.monitor.gtol = parse_double(*e, "gtol");
  if (const auto* e = c.find("monitor", "flat_tol"))
    cfg.monitor.flat_tol = parse_double(*e, "flat_tol");

  if (const auto* e = c.find("output", "csv")) cfg.csv = e->value;
  if (const auto* e = c.find("output", "summary")) cfg.summary = e->value;
  if (const auto* e = c.find("output", "checkpoint")) cfg.checkpoint = e->value;
  if (const auto* e = c.find("output", "checkpoint_interval"))
    cfg.checkpoint_interval = static_cast<int>(parse_int(*e, "checkpoint_interval"));
  if (const auto* e = c.find("output", "threads"))
    cfg.threads = static_cast<int>(parse_int(*e, "threads"));

  c.reject_unused({"run", "geometry", "bundle", "initial", "flow", "hym",
                   "monitor", "output"});

  // cross-field checks
  if (cfg.rank < 1 || cfg.rank > kMaxRank)
    throw ConfigError("rank must be in [1," + std::to_string(kMaxRank) + "]");
  if (cfg.mode == "hym" && cfg.kind != "complex")
    throw ConfigError("hym mode needs a complex bundle");
  if (cfg.mode == "hym" && cfg.n % 2 != 0)
    throw ConfigError("hym mode needs even real dimension");
  if (cfg.initial_kind == "file" && cfg.initial_file.empty())
    throw ConfigError("initial kind 'file' needs a file path");
  cfg.monitor.gtol = cfg.flow.gtol;  // one convergence threshold per run
  cfg.flow.threads = cfg.threads;
  return cfg;
}

}  // namespace ymlab
