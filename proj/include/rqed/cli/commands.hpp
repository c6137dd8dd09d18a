#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rqed/cli/io.hpp"
#include "rqed/cli/json_reader.hpp"
#include "rqed/constants.hpp"
#include "rqed/density_matrix.hpp"
#include "rqed/dicke_phase.hpp"
#include "rqed/domain_lattice.hpp"
#include "rqed/fel.hpp"
#include "rqed/mean_field.hpp"
#include "rqed/measurement.hpp"
#include "rqed/numeric.hpp"
#include "rqed/random.hpp"
#include "rqed/superselection.hpp"

// One function per subcommand: parameters in, files and a summary table out.
// Nothing here touches the filesystem.
namespace rqed::cli {

struct Context {
  PhysicalConstants k;
  std::uint64_t seed = 0;
};

struct CommandResult {
  std::vector<Artifact> files;
  Table table;  // the rows a sweep concatenates
};

// Magnitude of the water molecule's dipole moment, C m.
inline constexpr double kDefaultDipole = 6.2e-30;

inline dicke::QuasiParticleSpec read_element(ObjectReader& r, const PhysicalConstants& k) {
  dicke::QuasiParticleSpec s;
  s.eps_gap = r.number("eps_gap", k.eps_w);
  s.d10 = r.vec3("d10", Vector3d(kDefaultDipole, 0.0, 0.0));
  s.pol = r.vec3("pol", Vector3d::UnitX());
  dicke::validate(s);
  return s;
}

inline dicke::QuasiParticleSpec read_element_at(ObjectReader& parent, const std::string& key,
                                                const PhysicalConstants& k) {
  static const json empty = json::object();
  const json* j = parent.find(key);
  ObjectReader r(j ? *j : empty, parent.at(key));
  auto s = read_element(r, k);
  r.finish();
  return s;
}

// ---------------------------------------------------------------- fel

inline CommandResult run_fel(const json& params, const Context& ctx) {
  ObjectReader r(params, "/fel");
  const std::string preset = r.string("preset", "reference");
  if (preset != "reference") fail_at(r.at("preset"), "unknown preset '" + preset + "', expected reference");
  fel::AxonPreset p = fel::AxonPreset::reference();
  p.l_a = r.number("l_a", p.l_a);
  p.l_r = r.number("l_r", p.l_r);
  p.n_ms = r.number("n_ms", p.n_ms);
  p.N_total = r.number("N_total", p.N_total);
  p.v_cond = r.number("v_cond", p.v_cond);
  p.dU = r.number("dU", p.dU);
  p.E0z = r.number("E0z", p.E0z);
  p.P_z = r.number("P_z", p.P_z);
  const auto rho_override = r.optional_number("rho");
  r.finish();
  (void)ctx;

  fel::validate(p);
  const double rho = rho_override ? *rho_override : fel::ion_density(p);
  const auto s = fel::steady_state(rho, p.P_z);

  CommandResult out;
  out.table.header = "rho,P_z,A0,t_gain,ratio";
  out.table.rows.push_back(num(s.rho) + "," + num(s.P_z) + "," + num(s.A0) + "," + num(s.t_gain) +
                           "," + num(fel::timescale_ratio(s, p)));
  out.files.push_back({"fel.csv", out.table.str()});
  return out;
}

// ---------------------------------------------------------------- phase diagram

inline CommandResult run_phase_diagram(const json& params, const Context& ctx) {
  ObjectReader r(params, "/phase-diagram");
  const double rho_max = r.number("rho_max", 4.0);
  const double t_max = r.number("t_max", 2.0);
  const auto nx = r.uint("nx", 200);
  const auto ny = r.uint("ny", 200);
  const auto element = read_element_at(r, "element", ctx.k);
  r.finish();
  if (!(rho_max > 0.0) || !(t_max > 0.0)) fail_at(r.path(), "rho_max and t_max must be positive");
  if (nx < 2 || ny < 2) fail_at(r.path(), "nx and ny must be at least 2");

  const auto rho_rel = linspace(0.0, rho_max, nx);
  const auto kT_rel = linspace(0.0, t_max, ny);
  const auto d = dicke::normalized_phase_diagram(element, rho_rel, kT_rel, ctx.k);

  CommandResult out;
  out.table.header = "rho_over_rhoc,kT_over_eps,phase";
  out.table.rows.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      out.table.rows.push_back(num(rho_rel[i]) + "," + num(kT_rel[j]) + "," +
                               dicke::to_string(d.at(i, j).phase));
    }
  }
  out.files.push_back({"phase_diagram.csv", out.table.str()});
  return out;
}

// ---------------------------------------------------------------- dynamics

struct DynamicsScene {
  mean_field::ModeSet modes;
  mean_field::MeanFieldState initial;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t record_every = 1;
};

inline DynamicsScene read_dynamics(const json& params, const PhysicalConstants& k) {
  ObjectReader r(params, "/dynamics");
  const double shared_gap = r.number("eps_gap", k.eps_w);

  std::vector<dicke::QuasiParticleSpec> elements;
  std::vector<Vector3d> positions;
  const json& el = as_array(r.require("elements"), r.at("elements"));
  for (std::size_t i = 0; i < el.size(); ++i) {
    ObjectReader e(el[i], pointer_join(r.at("elements"), i));
    dicke::QuasiParticleSpec s;
    s.eps_gap = e.number("eps_gap", shared_gap);
    s.d10 = e.vec3("d10", Vector3d(kDefaultDipole, 0.0, 0.0));
    positions.push_back(e.vec3("position"));
    e.finish();
    elements.push_back(s);
  }
  if (elements.empty()) fail_at(r.at("elements"), "at least one element is required");

  const double omega = shared_gap / k.hbar;
  const double k_shell = omega / k.c;
  std::vector<mean_field::Mode> modes;
  const json& md = as_array(r.require("modes"), r.at("modes"));
  for (std::size_t a = 0; a < md.size(); ++a) {
    ObjectReader m(md[a], pointer_join(r.at("modes"), a));
    const Vector3d dir = m.vec3("direction");
    const Vector3d pol = m.vec3("pol");
    m.finish();
    if (!(dir.norm() > 0.0)) fail_at(m.at("direction"), "direction must be non-zero");
    modes.push_back({dir.normalized() * k_shell, pol});
  }

  // Either a volume in m^3 or the dimensionless coupling |lambda|/Omega of
  // the first element to the first mode.
  const auto volume = r.optional_number("volume");
  const auto coupling = r.optional_number("coupling");
  if (volume.has_value() == coupling.has_value()) {
    fail_at(r.path(), "give exactly one of 'volume' and 'coupling'");
  }
  double V = 0.0;
  if (volume) {
    V = *volume;
  } else {
    if (!(*coupling > 0.0)) fail_at(r.at("coupling"), "coupling must be positive");
    if (modes.empty()) fail_at(r.at("modes"), "at least one mode is required");
    const double proj = modes.front().pol.dot(elements.front().d10);
    if (proj == 0.0) fail_at(r.at("coupling"), "first element does not couple to the first mode");
    V = proj * proj / (omega * k.eps0 * k.hbar * *coupling * *coupling);
  }

  DynamicsScene scene;
  scene.modes = mean_field::make_modes(elements, positions, V, modes, k);

  ObjectReader init = r.object("initial");
  if (init.has("ansatz")) {
    ObjectReader a = init.object("ansatz");
    mean_field::VevAnsatz ans{a.number("v"), a.number("theta0", 0.0)};
    a.finish();
    scene.initial = mean_field::stationary_state(ans, scene.modes);
  } else {
    const json& sp = as_array(init.require("spins"), init.at("spins"));
    std::vector<Vector3d> spins;
    for (std::size_t i = 0; i < sp.size(); ++i) spins.push_back(as_vec3(sp[i], pointer_join(init.at("spins"), i)));
    if (spins.size() != elements.size()) fail_at(init.at("spins"), "need one spin per element");
    scene.initial = mean_field::make_state(scene.modes, std::move(spins));
    for (const char* key : {"q", "p"}) {
      const json* v = init.find(key);
      if (!v) continue;
      as_array(*v, init.at(key));
      if (v->size() != scene.modes.n_modes()) fail_at(init.at(key), "need one value per mode");
      auto& dst = std::string(key) == "q" ? scene.initial.q : scene.initial.p;
      for (std::size_t a = 0; a < v->size(); ++a) {
        dst[static_cast<Eigen::Index>(a)] = as_complex((*v)[a], pointer_join(init.at(key), a));
      }
    }
  }
  init.finish();

  const auto dt = r.optional_number("dt");
  const auto dt_omega = r.optional_number("dt_omega");
  if (dt.has_value() == dt_omega.has_value()) fail_at(r.path(), "give exactly one of 'dt' and 'dt_omega'");
  scene.dt = dt ? *dt : *dt_omega / scene.modes.omega;
  scene.steps = r.uint("steps");
  scene.record_every = r.uint("record_every", 1);
  if (scene.record_every == 0) fail_at(r.at("record_every"), "must be at least 1");
  r.finish();

  mean_field::validate(scene.initial, scene.modes);
  return scene;
}

inline CommandResult run_dynamics(const json& params, const Context& ctx) {
  const auto scene = read_dynamics(params, ctx.k);
  const auto traj = mean_field::integrate(scene.initial, scene.modes, scene.dt, scene.steps,
                                          {scene.record_every});
  const auto n0 = mean_field::spin_norms(scene.initial);

  CommandResult out;
  std::string h = "t";
  for (std::size_t a = 0; a < scene.modes.n_modes(); ++a) {
    h += ",Re(q_" + std::to_string(a) + "),Im(q_" + std::to_string(a) + ")";
  }
  for (std::size_t i = 0; i < scene.modes.n_elements(); ++i) {
    const auto s = std::to_string(i);
    h += ",s1_" + s + ",s2_" + s + ",s3_" + s;
  }
  h += ",energy,spin_norm_drift";
  out.table.header = h;
  out.table.rows.reserve(traj.size());
  for (const auto& st : traj) {
    std::string row = num(st.time);
    for (Eigen::Index a = 0; a < st.q.size(); ++a) row += "," + num(st.q[a].real()) + "," + num(st.q[a].imag());
    for (const auto& sp : st.spins) row += "," + num(sp[0]) + "," + num(sp[1]) + "," + num(sp[2]);
    const auto n = mean_field::spin_norms(st);
    double drift = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) drift = std::max(drift, std::abs(n[i] - n0[i]));
    row += "," + num(mean_field::hamiltonian(st, scene.modes, ctx.k)) + "," + num(drift);
    out.table.rows.push_back(std::move(row));
  }
  out.files.push_back({"dynamics.csv", out.table.str()});
  return out;
}

// ---------------------------------------------------------------- decoherence

inline decoherence::EnergyMap read_energy_map(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind", "linear");
  const double gain = r.number("gain");
  decoherence::EnergyMap map;
  if (kind == "linear") {
    map = decoherence::linear_energy(gain);
  } else if (kind == "power") {
    map = decoherence::power_energy(gain, r.number("exponent"));
  } else {
    fail_at(r.at("kind"), "unknown energy map '" + kind + "', expected linear or power");
  }
  r.finish();
  return map;
}

inline decoherence::WindowShape read_window(const std::string& s, const std::string& path) {
  if (s == "box") return decoherence::WindowShape::Box;
  if (s == "gaussian") return decoherence::WindowShape::Gaussian;
  fail_at(path, "unknown window '" + s + "', expected box or gaussian");
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json report_json(const decoherence::DampingReport& rep) {
  return {{"factors", rep.factors},
          {"progress", finite_or_null(rep.progress)},
          {"infinite", rep.infinite},
          {"satisfied", rep.satisfied},
          {"threshold", rep.threshold}};
}

inline CommandResult run_decoherence(const json& params, const Context& ctx) {
  ObjectReader r(params, "/decoherence");

  std::vector<decoherence::SensoryLayer> layers;
  const json& lj = as_array(r.require("layers"), r.at("layers"));
  for (std::size_t i = 0; i < lj.size(); ++i) {
    ObjectReader l(lj[i], pointer_join(r.at("layers"), i));
    decoherence::SensoryLayer layer;
    layer.n_cells = l.uint("n_cells");
    layer.lambda_gain = l.number("lambda_gain");
    layer.dt_window = l.number("dt_window");
    layer.dP0 = l.optional_number("dP0");
    layer.dQ0 = l.optional_number("dQ0");
    layer.cell_volume = l.number("cell_volume", layer.cell_volume);
    layer.cation_mass = l.number("cation_mass", layer.cation_mass);
    l.finish();
    decoherence::validate(layer, ctx.k);
    layers.push_back(layer);
  }
  if (layers.empty()) fail_at(r.at("layers"), "at least one layer is required");
  std::size_t max_cells = 0;
  for (const auto& l : layers) max_cells = std::max(max_cells, l.n_cells);

  ObjectReader sr = r.object("stimulus");
  decoherence::Stimulus stim;
  const json& oj = as_array(sr.require("outcomes"), sr.at("outcomes"));
  for (std::size_t a = 0; a < oj.size(); ++a) {
    ObjectReader o(oj[a], pointer_join(sr.at("outcomes"), a));
    decoherence::StimulusOutcome out;
    out.label = o.string("label");
    out.value = o.number("value");
    if (const json* cells = o.find("active_cells")) {
      as_array(*cells, o.at("active_cells"));
      for (std::size_t c = 0; c < cells->size(); ++c) {
        out.active_cells.push_back(as_uint((*cells)[c], pointer_join(o.at("active_cells"), c)));
      }
    } else {
      for (std::size_t c = 0; c < max_cells; ++c) out.active_cells.push_back(c);
    }
    o.finish();
    stim.outcomes.push_back(std::move(out));
  }
  const json& ej = sr.require("energy");
  if (ej.is_array()) {
    for (std::size_t c = 0; c < ej.size(); ++c) stim.energy_maps.push_back(read_energy_map(ej[c], pointer_join(sr.at("energy"), c)));
  } else {
    stim.energy_maps.push_back(read_energy_map(ej, sr.at("energy")));
  }
  sr.finish();
  for (const auto& l : layers) decoherence::validate(stim, l.n_cells);
  if (stim.outcomes.size() < 2) fail_at(sr.at("outcomes"), "at least two outcomes are required");

  std::string m_label = stim.outcomes[0].label;
  std::string n_label = stim.outcomes[1].label;
  if (const json* pair = r.find("pair")) {
    if (!pair->is_array() || pair->size() != 2) fail_at(r.at("pair"), "expected two outcome labels");
    m_label = as_string((*pair)[0], pointer_join(r.at("pair"), 0));
    n_label = as_string((*pair)[1], pointer_join(r.at("pair"), 1));
  }
  const auto shape = read_window(r.string("window", "box"), r.at("window"));
  const double threshold = r.number("threshold", decoherence::kDefaultThreshold);
  const auto dn0 = r.optional_number("dn0");

  std::vector<Complex> amps;
  if (const json* aj = r.find("amplitudes")) {
    as_array(*aj, r.at("amplitudes"));
    for (std::size_t a = 0; a < aj->size(); ++a) amps.push_back(as_complex((*aj)[a], pointer_join(r.at("amplitudes"), a)));
    if (amps.size() != stim.outcomes.size()) fail_at(r.at("amplitudes"), "need one amplitude per outcome");
  } else {
    amps.assign(stim.outcomes.size(), Complex(1.0 / std::sqrt(static_cast<double>(stim.outcomes.size())), 0.0));
  }
  r.finish();
  double norm = 0.0;
  for (const auto& c : amps) norm += std::norm(c);
  if (std::abs(norm - 1.0) > 1e-12) fail_at("/decoherence/amplitudes", "amplitudes must be normalized");

  const auto rep = decoherence::decoherence_progress(layers, stim, m_label, n_label, shape, threshold, ctx.k);
  const Eigen::MatrixXd F = decoherence::coherence_factors(layers, stim, shape, ctx.k);
  const auto rho0 = pure_state(amps, outcome_labels(amps.size()));
  const auto rho1 = decoherence::apply_superselection(rho0, F);

  json doc;
  doc["pair"] = {m_label, n_label};
  doc["window"] = shape == decoherence::WindowShape::Box ? "box" : "gaussian";
  doc["report"] = report_json(rep);
  json fm = json::array();
  for (Eigen::Index a = 0; a < F.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < F.cols(); ++b) row.push_back(F(a, b));
    fm.push_back(row);
  }
  doc["coherence_factors"] = fm;
  doc["outcomes"] = json::array();
  for (const auto& o : stim.outcomes) doc["outcomes"].push_back(o.label);
  if (dn0) {
    if (layers.size() != 1) fail_at("/decoherence/dn0", "count form needs exactly one layer");
    const auto forms = decoherence::criterion_forms(layers.front(), stim, m_label, n_label, *dn0, threshold, ctx.k);
    doc["criterion_forms"] = {{"mass_form", report_json(forms.mass_form)},
                              {"count_form", report_json(forms.count_form)},
                              {"ratio", finite_or_null(forms.ratio)}};
  }
  doc["purity_before"] = rho0.purity();
  doc["purity_after"] = rho1.purity();

  CommandResult out;
  out.table.header = "row,col,re,im";
  for (Eigen::Index a = 0; a < rho1.entries.rows(); ++a) {
    for (Eigen::Index b = 0; b < rho1.entries.cols(); ++b) {
      out.table.rows.push_back(std::to_string(a) + "," + std::to_string(b) + "," +
                               num(rho1.entries(a, b).real()) + "," + num(rho1.entries(a, b).imag()));
    }
  }
  out.files.push_back({"decoherence_report.json", doc.dump(2) + "\n"});
  out.files.push_back({"decoherence_rho.csv", out.table.str()});
  return out;
}

// ---------------------------------------------------------------- measure

inline CommandResult run_measure(const json& params, const Context& ctx) {
  ObjectReader r(params, "/measure");
  const auto scheme = measurement::parse_scheme(r.string("scheme", "I"));
  std::vector<Complex> amps;
  const json& aj = as_array(r.require("amplitudes"), r.at("amplitudes"));
  for (std::size_t a = 0; a < aj.size(); ++a) amps.push_back(as_complex(aj[a], pointer_join(r.at("amplitudes"), a)));
  const auto samples = r.uint("samples", 1000);
  const double temperature = r.number("temperature", 310.0);
  measurement::InitOptions init;
  init.firing_pattern = r.string("firing_pattern", "");
  if (const json* mp = r.find("memory_patterns")) {
    as_array(*mp, r.at("memory_patterns"));
    for (std::size_t i = 0; i < mp->size(); ++i) init.memory_patterns.push_back(as_string((*mp)[i], pointer_join(r.at("memory_patterns"), i)));
  }
  r.finish();
  if (samples == 0) fail_at(r.at("samples"), "must be at least 1");
  if (!(temperature > 0.0)) fail_at(r.at("temperature"), "must be positive");

  const auto rho0 = measurement::init_scheme(amps, scheme, init);
  const auto rho1 = measurement::nonselective_step(rho0);
  const auto map = measurement::default_feedback(scheme, amps.size(), rho0.labels.front().pattern);
  const auto rho2 = measurement::feedback_step(rho1, map);

  Rng rng(ctx.seed);
  measurement::EnergyLedger ledger;
  ledger.temperature = temperature;
  const auto hist = measurement::read_many(rho2, scheme, samples, rng, ledger, ctx.k);

  json doc;
  doc["scheme"] = measurement::to_string(scheme);
  doc["seed"] = ctx.seed;
  doc["samples"] = samples;
  json steps = json::array();
  const std::pair<const char*, const DensityMatrix*> named[] = {{"initial", &rho0}, {"dephased", &rho1}, {"correlated", &rho2}};
  for (const auto& [name, rho] : named) {
    steps.push_back({{"step", name},
                     {"trace", rho->trace().real()},
                     {"min_eigenvalue", rho->min_eigenvalue()},
                     {"purity", rho->purity()}});
  }
  doc["steps"] = steps;

  CommandResult out;
  out.table.header = "label,weight,count,frequency";
  json diag = json::array();
  json histo = json::array();
  const auto w = rho2.diagonal_weights();
  for (std::size_t a = 0; a < rho2.dim(); ++a) {
    const auto label = measurement::label_string(rho2.labels[a], scheme);
    const double freq = static_cast<double>(hist[a]) / static_cast<double>(samples);
    diag.push_back({{"label", label}, {"weight", w[a]}});
    histo.push_back({{"label", label}, {"count", hist[a]}, {"frequency", freq}});
    out.table.rows.push_back(label + "," + num(w[a]) + "," + std::to_string(hist[a]) + "," + num(freq));
  }
  doc["diagonal"] = diag;
  doc["histogram"] = histo;
  doc["ledger"] = {{"readings", ledger.entries.size()},
                   {"temperature", ledger.temperature},
                   {"cost_per_reading", measurement::reading_cost(scheme, temperature, ctx.k)},
                   {"total", ledger.total()}};
  out.files.push_back({"measure.json", doc.dump(2) + "\n"});
  return out;
}

// ---------------------------------------------------------------- lattice

// Field samples in normalized units: rho in units of rho_c, T as k_B T / eps.
// Presets are evaluated at sample centers; positions are fractions of the
// extents.
inline lattice::BoundaryField read_field(const json& j, const std::string& path,
                                         const lattice::LatticeSpec& spec,
                                         const lattice::Dims& domains, const PhysicalConstants& k) {
  ObjectReader r(j, path);
  lattice::BoundaryField f;
  f.t = r.number("t", 0.0);
  const std::string units = r.string("units", "normalized");
  if (units != "normalized" && units != "si") fail_at(r.at("units"), "expected normalized or si");
  const std::string preset = r.string("preset", "grid");

  lattice::Dims samples{domains[0] * 4, domains[1] * 4, domains[2] * 4};
  if (const json* sj = r.find("samples")) {
    if (!sj->is_array() || sj->size() != 3) fail_at(r.at("samples"), "expected 3 integers");
    for (std::size_t a = 0; a < 3; ++a) samples[a] = as_uint((*sj)[a], pointer_join(r.at("samples"), a));
  }
  f.samples = samples;
  const std::size_t n = f.size();
  if (n == 0) fail_at(r.at("samples"), "sample counts must be positive");
  f.rho.resize(n);
  f.T.resize(n);

  auto frac = [&](std::size_t axis, std::size_t s) {
    return (static_cast<double>(s) + 0.5) / static_cast<double>(samples[axis]);
  };
  auto for_each_sample = [&](auto&& fn) {
    for (std::size_t z = 0; z < samples[2]; ++z)
      for (std::size_t y = 0; y < samples[1]; ++y)
        for (std::size_t x = 0; x < samples[0]; ++x)
          fn((z * samples[1] + y) * samples[0] + x, Vector3d(frac(0, x), frac(1, y), frac(2, z)));
  };

  if (preset == "grid") {
    auto rho = as_numbers(r.require("rho"), r.at("rho"));
    auto T = as_numbers(r.require("T"), r.at("T"));
    if (rho.size() != n || T.size() != n) fail_at(r.path(), "rho and T need one value per sample");
    f.rho = std::move(rho);
    f.T = std::move(T);
  } else if (preset == "uniform") {
    const double rho = r.number("rho");
    const double T = r.number("T");
    std::fill(f.rho.begin(), f.rho.end(), rho);
    std::fill(f.T.begin(), f.T.end(), T);
  } else if (preset == "gaussian-blob") {
    const double bg = r.number("background_rho");
    const double peak = r.number("peak_rho");
    const Vector3d center = r.vec3("center", Vector3d::Constant(0.5));
    const double sigma = r.number("sigma");
    const double T = r.number("T");
    if (!(sigma > 0.0)) fail_at(r.at("sigma"), "must be positive");
    for_each_sample([&](std::size_t s, const Vector3d& x) {
      const double d2 = (x - center).squaredNorm();
      f.rho[s] = bg + (peak - bg) * std::exp(-0.5 * d2 / (sigma * sigma));
      f.T[s] = T;
    });
  } else if (preset == "linear-gradient") {
    const double from = r.number("rho_from");
    const double to = r.number("rho_to");
    const auto axis = r.uint("axis", 0);
    const double T = r.number("T");
    if (axis > 2) fail_at(r.at("axis"), "must be 0, 1 or 2");
    for_each_sample([&](std::size_t s, const Vector3d& x) {
      f.rho[s] = from + (to - from) * x[static_cast<Eigen::Index>(axis)];
      f.T[s] = T;
    });
  } else {
    fail_at(r.at("preset"), "unknown preset '" + preset + "', expected grid, uniform, gaussian-blob or linear-gradient");
  }

  if (const json* pj = r.find("perturbation")) {
    if (pj->is_boolean()) {
      f.perturbation.assign(n, pj->get<bool>() ? 1 : 0);
    } else {
      as_array(*pj, r.at("perturbation"));
      if (pj->size() != n) fail_at(r.at("perturbation"), "need one flag per sample or a single boolean");
      f.perturbation.resize(n);
      for (std::size_t s = 0; s < n; ++s) {
        const json& v = (*pj)[s];
        f.perturbation[s] = v.is_boolean() ? (v.get<bool>() ? 1 : 0)
                                           : (as_uint(v, pointer_join(r.at("perturbation"), s)) != 0);
      }
    }
  }
  r.finish();

  if (units == "normalized") {
    const double rho_c = dicke::critical_density(spec.spec, k);
    const double T_scale = spec.spec.eps_gap / k.k_B;
    for (std::size_t s = 0; s < n; ++s) {
      f.rho[s] *= rho_c;
      f.T[s] *= T_scale;
    }
  }
  lattice::validate(f);
  return f;
}

inline CommandResult run_lattice(const json& params, const Context& ctx) {
  ObjectReader r(params, "/lattice");
  lattice::LatticeSpec spec;
  spec.l_c = r.number("l_c", coherence_length(ctx.k));
  spec.extents = r.vec3("extents");
  spec.spec = read_element_at(r, "element", ctx.k);
  const bool latch = r.boolean("latch", false);
  const auto dc = lattice::domain_count(spec);

  const auto field = read_field(r.require("field"), r.at("field"), spec, dc.dims, ctx.k);
  std::vector<lattice::BoundaryField> later;
  if (const json* rw = r.find("rewrite")) {
    as_array(*rw, r.at("rewrite"));
    for (std::size_t i = 0; i < rw->size(); ++i) {
      later.push_back(read_field((*rw)[i], pointer_join(r.at("rewrite"), i), spec, dc.dims, ctx.k));
    }
  }
  r.finish();

  auto state = lattice::code_lattice(spec, field, ctx.k);
  json rewrites = json::array();
  for (const auto& f : later) {
    auto res = lattice::rewrite(state, spec, f, ctx.k, {latch});
    rewrites.push_back({{"t", f.t}, {"flipped", res.flipped}, {"set", res.set},
                        {"cleared", res.cleared}, {"held", res.held}});
    state = std::move(res.state);
  }
  const auto st = lattice::stats(state);

  json doc;
  doc["dims"] = {state.dims[0], state.dims[1], state.dims[2]};
  doc["n"] = st.n;
  doc["ones"] = st.ones;
  doc["ones_fraction"] = st.ones_fraction;
  doc["zeros_fraction"] = st.zeros_fraction;
  doc["l_c"] = spec.l_c;
  doc["latch"] = latch;
  json hist = json::array();
  for (const auto& h : state.history) hist.push_back({{"t", h.t}, {"changed", h.changed}});
  doc["history"] = hist;
  doc["rewrites"] = rewrites;

  std::string bits = "ix,iy,iz,bit\n";
  for (std::size_t z = 0; z < state.dims[2]; ++z)
    for (std::size_t y = 0; y < state.dims[1]; ++y)
      for (std::size_t x = 0; x < state.dims[0]; ++x)
        bits += std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + "," +
                std::to_string(state.bit(x, y, z)) + "\n";

  CommandResult out;
  out.table.header = "ones_fraction,zeros_fraction,n";
  out.table.rows.push_back(num(st.ones_fraction) + "," + num(st.zeros_fraction) + "," + std::to_string(st.n));
  out.files.push_back({"lattice_bits.csv", std::move(bits)});
  out.files.push_back({"lattice_stats.json", doc.dump(2) + "\n"});
  return out;
}

// ---------------------------------------------------------------- dispatch

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"fel", "phase-diagram", "dynamics",
                                              "decoherence", "measure", "lattice"};
  return names;
}

inline CommandResult run_command(const std::string& name, const json& params, const Context& ctx) {
  if (name == "fel") return run_fel(params, ctx);
  if (name == "phase-diagram") return run_phase_diagram(params, ctx);
  if (name == "dynamics") return run_dynamics(params, ctx);
  if (name == "decoherence") return run_decoherence(params, ctx);
  if (name == "measure") return run_measure(params, ctx);
  if (name == "lattice") return run_lattice(params, ctx);
  throw ValidationError("unknown subcommand '" + name + "'");
}

}  // namespace rqed::cli
