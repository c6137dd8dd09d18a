#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rqed/cli/commands.hpp"
#include "rqed/cli/io.hpp"
#include "rqed/cli/json_reader.hpp"
#include "rqed/errors.hpp"
#include "rqed/numeric.hpp"
#include "rqed/parallel.hpp"

namespace rqed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Values for one parameter, addressed by a JSON pointer into the config
/// document (e.g. /fel/P_z or /constants/eps_w).
struct SweepSpec {
  std::string path;
  std::vector<double> values;
};

struct RunConfig {
  std::string command;
  json doc = json::object();  // full config document, command section under its name
  std::uint64_t seed = 0;
  std::filesystem::path out = "rqed_out";
  std::size_t workers = 1;
  std::optional<SweepSpec> sweep;
};

inline SweepSpec read_sweep(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SweepSpec s;
  s.path = r.string("path");
  if (const json* v = r.find("values")) {
    s.values = as_numbers(*v, r.at("values"));
    if (r.has("min") || r.has("max") || r.has("count") || r.has("scale")) {
      fail_at(path, "give either 'values' or a min/max/count grid, not both");
    }
  } else {
    const double lo = r.number("min");
    const double hi = r.number("max");
    const auto count = r.uint("count");
    const std::string scale = r.string("scale", "linear");
    if (count < 1) fail_at(r.at("count"), "must be at least 1");
    if (scale == "linear") {
      s.values = linspace(lo, hi, count);
    } else if (scale == "log") {
      if (!(lo > 0.0) || !(hi > 0.0)) fail_at(path, "log grids need positive endpoints");
      s.values = logspace(lo, hi, count);
    } else {
      fail_at(r.at("scale"), "expected linear or log");
    }
  }
  r.finish();
  if (s.values.empty()) fail_at(path, "sweep has no values");
  return s;
}

/// Parses the --sweep shorthand PATH=v1,v2,... or PATH=min:max:count[:log].
inline SweepSpec parse_sweep_flag(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--sweep expects PATH=v1,v2,... or PATH=min:max:count[:log]");
  }
  json j;
  j["path"] = text.substr(0, eq);
  const std::string rhs = text.substr(eq + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("--sweep: '" + s + "' is not a number");
  };
  std::vector<std::string> parts;
  const char sep = rhs.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(rhs);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  if (sep == ':') {
    if (parts.size() != 3 && parts.size() != 4) throw ValidationError("--sweep: expected min:max:count[:log]");
    j["min"] = number(parts[0]);
    j["max"] = number(parts[1]);
    const double c = number(parts[2]);
    if (!(c >= 1.0) || c != std::floor(c)) throw ValidationError("--sweep: count must be a positive integer");
    j["count"] = static_cast<std::uint64_t>(c);
    if (parts.size() == 4) j["scale"] = parts[3];
  } else {
    j["values"] = json::array();
    for (const auto& p : parts) j["values"].push_back(number(p));
  }
  return read_sweep(j, "--sweep");
}

/// Sets doc[path] = value. Intermediate objects are created on demand, but
/// array indices must already exist and the first token must name the
/// command section, `constants` or `seed`.
inline void set_at_pointer(json& doc, const std::string& path, const std::string& command, double value) {
  if (path.empty() || path[0] != '/') {
    throw ValidationError("sweep path '" + path + "' must be a JSON pointer starting with '/'");
  }
  std::vector<std::string> tokens;
  try {
    for (json::json_pointer ptr(path); !ptr.empty(); ptr.pop_back()) tokens.insert(tokens.begin(), ptr.back());
  } catch (const json::exception& e) {
    throw ValidationError("sweep path '" + path + "': " + e.what());
  }
  if (tokens.empty() || (tokens[0] != command && tokens[0] != "constants" && tokens[0] != "seed")) {
    throw ValidationError("sweep path '" + path + "' must start with /" + command + ", /constants or /seed");
  }
  json* node = &doc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool last = i + 1 == tokens.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(tokens[i], &used);
        if (used != tokens[i].size()) throw std::invalid_argument("index");
      } catch (const std::exception&) {
        throw ValidationError("sweep path '" + path + "' does not resolve: '" + tokens[i] + "' is not an array index");
      }
      if (idx >= node->size()) {
        throw ValidationError("sweep path '" + path + "' does not resolve: index " + tokens[i] + " out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      if (node->is_null()) *node = json::object();
      node = &(*node)[tokens[i]];
    } else {
      throw ValidationError("sweep path '" + path + "' does not resolve: '" + tokens[i - 1] + "' is not a container");
    }
    if (!last && node->is_null()) *node = json::object();
  }
  if (tokens.size() == 1 && tokens[0] == "seed") {
    if (!(value >= 0.0) || value != std::floor(value)) throw ValidationError("sweep over /seed needs non-negative integers");
    *node = static_cast<std::uint64_t>(value);
  } else {
    *node = value;
  }
}

/// Reads the top-level config keys; the command section stays in `doc`.
inline void apply_top_level(RunConfig& cfg) {
  ObjectReader r(cfg.doc, "");
  for (const auto& name : command_names()) r.find(name);
  r.find("constants");
  cfg.seed = r.uint("seed", cfg.seed);
  cfg.workers = static_cast<std::size_t>(r.uint("workers", cfg.workers));
  if (const json* s = r.find("sweep")) cfg.sweep = read_sweep(*s, "/sweep");
  r.finish();
  if (cfg.workers == 0) fail_at("/workers", "must be at least 1");
}

inline Context make_context(const json& doc, std::uint64_t seed) {
  Context ctx;
  auto it = doc.find("constants");
  ctx.k = read_constants(it == doc.end() ? nullptr : &*it, "/constants");
  ctx.seed = seed;
  return ctx;
}

inline const json& section(const json& doc, const std::string& command) {
  static const json empty = json::object();
  auto it = doc.find(command);
  return it == doc.end() ? empty : *it;
}

inline std::string sweep_file_name(std::string command) {
  std::replace(command.begin(), command.end(), '-', '_');
  return command + "_sweep.csv";
}

/// Computes every artifact of a run in memory. Throws on any failure before
/// anything is written.
inline std::vector<Artifact> compute(const RunConfig& cfg) {
  if (!cfg.sweep) {
    const Context ctx = make_context(cfg.doc, cfg.seed);
    return run_command(cfg.command, section(cfg.doc, cfg.command), ctx).files;
  }

  const auto& values = cfg.sweep->values;
  // Resolve every point up front so path errors surface before any work.
  std::vector<json> docs(values.size(), cfg.doc);
  std::vector<std::uint64_t> seeds(values.size(), cfg.seed);
  for (std::size_t i = 0; i < values.size(); ++i) {
    set_at_pointer(docs[i], cfg.sweep->path, cfg.command, values[i]);
    if (cfg.sweep->path == "/seed") seeds[i] = docs[i]["seed"].get<std::uint64_t>();
  }

  std::vector<Table> tables(values.size());
  parallel_for(values.size(), cfg.workers, [&](std::size_t i) {
    try {
      const Context ctx = make_context(docs[i], seeds[i]);
      tables[i] = run_command(cfg.command, section(docs[i], cfg.command), ctx).table;
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.find("unknown key") != std::string::npos) {
        throw ValidationError("sweep path '" + cfg.sweep->path + "' does not resolve: " + what);
      }
      throw;
    }
  });

  Table all;
  all.header = "sweep_value," + tables.front().header;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string v = num(values[i]);
    for (const auto& row : tables[i].rows) all.rows.push_back(v + "," + row);
  }
  return {{sweep_file_name(cfg.command), all.str()}};
}

inline int run(const RunConfig& cfg, std::ostream& err) {
  try {
    write_artifacts(cfg.out, compute(cfg));
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
}

inline json load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + file.string() + ": " + e.what());
  }
}

/// Splits "a,b,c" into numbers (used by --amplitudes).
inline json parse_number_list(const std::string& text, const std::string& flag) {
  json arr = json::array();
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      std::size_t used = 0;
      const double v = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      arr.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": '" + p + "' is not a number");
    }
  }
  return arr;
}

/// Full command line entry point. Returns the process exit status.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  CLI::App app{"Collective-coherence memory models: steady states, phase diagrams, "
               "mean-field dynamics, decoherence and measurement"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_file;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string sweep_text;
  app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default rqed_out)");
  app.add_option("--seed", seed, "random seed (default 0)");
  app.add_option("--workers", workers, "concurrent sweep points (default 1)");
  app.add_option("--sweep", sweep_text, "PATH=v1,v2,... or PATH=min:max:count[:log]");

  auto* fel = app.add_subcommand("fel", "steady-state field amplitude and gain time");
  auto* pd = app.add_subcommand("phase-diagram", "superradiant/normal phase map");
  std::optional<double> rho_max;
  std::optional<double> t_max;
  std::optional<std::uint64_t> nx;
  std::optional<std::uint64_t> ny;
  pd->add_option("--rho-max", rho_max, "largest rho/rho_c");
  pd->add_option("--t-max", t_max, "largest k_B T/eps");
  pd->add_option("--nx", nx, "points along rho/rho_c");
  pd->add_option("--ny", ny, "points along k_B T/eps");
  auto* dyn = app.add_subcommand("dynamics", "mean-field trajectory of elements and field modes");
  auto* dec = app.add_subcommand("decoherence", "superselection damping and dephasing");
  auto* meas = app.add_subcommand("measure", "measurement pipeline with Born sampling");
  std::string scheme;
  std::string amplitudes;
  std::optional<std::uint64_t> samples;
  meas->add_option("--scheme", scheme, "I or II");
  meas->add_option("--amplitudes", amplitudes, "comma-separated real amplitudes");
  meas->add_option("--samples", samples, "number of readings");
  auto* lat = app.add_subcommand("lattice", "domain bit coding of a boundary field");
  (void)fel;
  (void)dyn;
  (void)dec;
  (void)lat;

  // CLI11 reports through exceptions; keep the documented exit codes.
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }

  RunConfig cfg;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!config_file.empty()) cfg.doc = load_config(config_file);
    if (!cfg.doc.is_object()) fail_at("", "config must be a JSON object");
    apply_top_level(cfg);

    json& sec = cfg.doc[cfg.command];
    if (sec.is_null()) sec = json::object();
    if (!sec.is_object()) fail_at("/" + cfg.command, "expected an object");
    if (rho_max) sec["rho_max"] = *rho_max;
    if (t_max) sec["t_max"] = *t_max;
    if (nx) sec["nx"] = *nx;
    if (ny) sec["ny"] = *ny;
    if (!scheme.empty()) sec["scheme"] = scheme;
    if (!amplitudes.empty()) sec["amplitudes"] = parse_number_list(amplitudes, "--amplitudes");
    if (samples) sec["samples"] = *samples;

    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (cfg.workers == 0) throw ValidationError("--workers must be at least 1");
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!sweep_text.empty()) cfg.sweep = parse_sweep_flag(sweep_text);
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
  return run(cfg, err);
}

}  // namespace rqed::cli
