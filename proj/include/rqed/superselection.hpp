#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rqed/constants.hpp"
#include "rqed/density_matrix.hpp"
#include "rqed/errors.hpp"

// Sensory transduction as a von Neumann measurement whose pointers are the
// cell-averaged cation mass concentrations Q, with the conjugate momenta P
// acting as continuous superselection observables. Interference between
// stimulus eigenstates m and n is damped by the characteristic function of
// the P distribution evaluated at delta2Q / hbar.
namespace rqed::decoherence {

// ---------------------------------------------------------------------------
// Diffusion (Fick's second law in three dimensions, x^2 = 6 D t)

inline double diffusion_time(double x, double D) {
  if (!(D > 0.0)) throw DomainError("diffusion_time: D must be positive");
  if (!(x >= 0.0)) throw DomainError("diffusion_time: distance must be non-negative");
  return x * x / (6.0 * D);
}

inline double diffusion_distance(double t, double D) {
  if (!(D > 0.0)) throw DomainError("diffusion_distance: D must be positive");
  if (!(t >= 0.0)) throw DomainError("diffusion_distance: time must be non-negative");
  return std::sqrt(6.0 * D * t);
}

/// c_x in x = c_x sqrt(t), m s^-1/2.
inline double diffusion_prefactor(double D) {
  if (!(D > 0.0)) throw DomainError("diffusion_prefactor: D must be positive");
  return std::sqrt(6.0 * D);
}

/// Cations carried in from a reservoir volume: concentration (per volume)
/// times volume, any consistent units.
inline double influx_floor(double concentration, double volume) {
  if (!(concentration >= 0.0) || !(volume >= 0.0)) {
    throw DomainError("influx_floor: inputs must be non-negative");
  }
  return concentration * volume;
}

// ---------------------------------------------------------------------------
// Sensory model

struct SensoryLayer {
  std::size_t n_cells = 1;
  double lambda_gain = 1.0;          // Lambda, kg m^-3 J^-1 s^-1
  double dt_window = 1.0;            // delta t, s
  std::optional<double> dP0;         // pointer momentum uncertainty, J s m^3/kg
  std::optional<double> dQ0;         // pointer uncertainty, kg/m^3
  double cell_volume = 1.0;          // m^3
  double cation_mass = 1.0;          // kg
};

/// (dQ0, dP0). A missing one is closed with dQ0 dP0 = hbar, the
/// uncertainty scale of the canonical pair (Q_bar, P_bar).
inline std::pair<double, double> pointer_uncertainties(const SensoryLayer& layer,
                                                       const PhysicalConstants& k) {
  if (layer.dQ0 && layer.dP0) return {*layer.dQ0, *layer.dP0};
  if (layer.dQ0) return {*layer.dQ0, k.hbar / *layer.dQ0};
  if (layer.dP0) return {k.hbar / *layer.dP0, *layer.dP0};
  throw ValidationError("sensory layer: at least one of dQ0, dP0 is required");
}

inline void validate(const SensoryLayer& layer, const PhysicalConstants& k) {
  if (layer.n_cells == 0 || !(layer.lambda_gain > 0) || !(layer.dt_window > 0) ||
      !(layer.cell_volume > 0) || !(layer.cation_mass > 0)) {
    throw ValidationError("sensory layer: n_cells, lambda_gain, dt_window, cell_volume and "
                          "cation_mass must be positive");
  }
  if ((layer.dQ0 && !(*layer.dQ0 > 0)) || (layer.dP0 && !(*layer.dP0 > 0))) {
    throw ValidationError("sensory layer: uncertainties must be positive");
  }
  const auto [dq, dp] = pointer_uncertainties(layer, k);
  // Order-of-magnitude consistency with dQ dP >= hbar/2.
  if (dq * dp < 0.05 * k.hbar) {
    throw ValidationError("sensory layer: dQ0 * dP0 is far below hbar/2");
  }
}

/// Energy input E_j(O) of receptor j; must satisfy E_j(0) = 0.
using EnergyMap = std::function<double(double)>;

inline EnergyMap linear_energy(double gain) {
  return [gain](double o) { return gain * o; };
}

/// gain * sign(O) |O|^exponent, exponent > 0.
inline EnergyMap power_energy(double gain, double exponent) {
  if (!(exponent > 0.0)) throw ValidationError("power_energy: exponent must be positive");
  return [gain, exponent](double o) {
    return o == 0.0 ? 0.0 : gain * std::copysign(std::pow(std::abs(o), exponent), o);
  };
}

struct StimulusOutcome {
  std::string label;
  double value = 0.0;                      // eigenvalue O_n
  std::vector<std::size_t> active_cells;   // receptors that see O_n; others see 0
};

struct Stimulus {
  std::vector<StimulusOutcome> outcomes;
  // One map per receptor, or a single map shared by all receptors.
  std::vector<EnergyMap> energy_maps;

  std::size_t index_of(const std::string& label) const {
    for (std::size_t a = 0; a < outcomes.size(); ++a) {
      if (outcomes[a].label == label) return a;
    }
    throw ValidationError("stimulus: unknown outcome label '" + label + "'");
  }

  const EnergyMap& map_for(std::size_t cell) const {
    return energy_maps.size() == 1 ? energy_maps.front() : energy_maps.at(cell);
  }

  /// E_j(O^(j)) for receptor j under outcome a.
  double energy(std::size_t outcome, std::size_t cell) const {
    const auto& o = outcomes.at(outcome);
    const bool active = std::find(o.active_cells.begin(), o.active_cells.end(), cell) !=
                        o.active_cells.end();
    return map_for(cell)(active ? o.value : 0.0);
  }
};

inline void validate(const Stimulus& stim, std::size_t n_cells) {
  if (stim.outcomes.empty()) throw ValidationError("stimulus: no outcomes");
  if (stim.energy_maps.empty() ||
      (stim.energy_maps.size() != 1 && stim.energy_maps.size() != n_cells)) {
    throw ValidationError("stimulus: need one energy map per receptor or a single shared map");
  }
  for (std::size_t j = 0; j < stim.energy_maps.size(); ++j) {
    if (!stim.energy_maps[j] || stim.energy_maps[j](0.0) != 0.0) {
      throw ValidationError("stimulus: energy map " + std::to_string(j) + " must satisfy E(0) = 0");
    }
  }
  for (const auto& o : stim.outcomes) {
    for (std::size_t c : o.active_cells) {
      if (c >= n_cells) {
        throw ValidationError("stimulus: outcome '" + o.label + "' activates cell " +
                              std::to_string(c) + " beyond the layer");
      }
    }
  }
}

struct Transduction {
  std::vector<double> delta_q;  // kg/m^3 per cell
  std::vector<double> delta_n;  // cations per cell
};

/// delta Q_j = Lambda E_j(O^(j)) delta t and delta n_j = delta Q_j v / m.
inline Transduction transduce(const SensoryLayer& layer, const Stimulus& stim,
                              const std::string& outcome) {
  validate(stim, layer.n_cells);
  const std::size_t idx = stim.index_of(outcome);
  Transduction t;
  t.delta_q.resize(layer.n_cells);
  t.delta_n.resize(layer.n_cells);
  for (std::size_t j = 0; j < layer.n_cells; ++j) {
    t.delta_q[j] = layer.lambda_gain * stim.energy(idx, j) * layer.dt_window;
    t.delta_n[j] = t.delta_q[j] * layer.cell_volume / layer.cation_mass;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Damping factors

enum class WindowShape { Box, Gaussian };

/// Distribution |phi(P)|^2 of a pointer momentum. Box: uniform on
/// [P0 - width, P0 + width]. Gaussian: standard deviation `width`.
struct PointerWindow {
  WindowShape shape = WindowShape::Box;
  double width = 1.0;
};

/// |characteristic function| at phase argument x = delta2Q * width / hbar.
inline double damping_from_phase(double x, WindowShape shape) {
  if (shape == WindowShape::Gaussian) return std::exp(-0.5 * x * x);
  if (x == 0.0) return 1.0;
  // Exact zeros at the (double) multiples of pi.
  if (std::remainder(x, kPi) == 0.0) return 0.0;
  return std::min(1.0, std::abs(std::sin(x)) / std::abs(x));
}

inline double damping_factor(double delta2Q, const PointerWindow& window,
                             const PhysicalConstants& k) {
  if (!(window.width > 0.0)) throw ValidationError("pointer window: width must be positive");
  return damping_from_phase(delta2Q * window.width / k.hbar, window.shape);
}

inline constexpr double kDefaultThreshold = 1e3;

struct DampingReport {
  std::vector<double> factors;  // per cell, layers in order
  double progress = 1.0;        // prod 1/factor; +inf when a factor vanishes
  bool infinite = false;
  bool satisfied = false;       // progress > threshold
  double threshold = kDefaultThreshold;
};

inline DampingReport report_from_factors(std::vector<double> factors, double threshold) {
  DampingReport r;
  r.threshold = threshold;
  double log_progress = 0.0;
  for (double f : factors) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw NumericalError("damping factor outside [0, 1]");
    }
    if (f == 0.0) {
      r.infinite = true;
    } else {
      log_progress -= std::log(f);
    }
  }
  r.progress = r.infinite ? std::numeric_limits<double>::infinity() : std::exp(log_progress);
  r.satisfied = r.progress > threshold;
  r.factors = std::move(factors);
  return r;
}

/// Progress of the criterion from phase arguments x_I directly.
inline DampingReport progress_from_phases(std::span<const double> x, WindowShape shape,
                                          double threshold = kDefaultThreshold) {
  std::vector<double> f;
  f.reserve(x.size());
  for (double xi : x) f.push_back(damping_from_phase(xi, shape));
  return report_from_factors(std::move(f), threshold);
}

/// delta2Q_I = Lambda (E_j(O_m) - E_j(O_n)) delta t for every cell of `layer`.
inline std::vector<double> second_differences(const SensoryLayer& layer, const Stimulus& stim,
                                              std::size_t m, std::size_t n) {
  std::vector<double> d(layer.n_cells);
  for (std::size_t j = 0; j < layer.n_cells; ++j) {
    d[j] = layer.lambda_gain * (stim.energy(m, j) - stim.energy(n, j)) * layer.dt_window;
  }
  return d;
}

/// Degree of progress of decoherence between outcomes m and n, taken over
/// all cells of all layers (cells with delta2Q = 0 contribute factor 1).
inline DampingReport decoherence_progress(std::span<const SensoryLayer> layers,
                                          const Stimulus& stim, const std::string& outcome_m,
                                          const std::string& outcome_n, WindowShape shape,
                                          double threshold, const PhysicalConstants& k) {
  if (layers.empty()) throw ValidationError("decoherence_progress: no layers");
  const std::size_t m = stim.index_of(outcome_m);
  const std::size_t n = stim.index_of(outcome_n);
  std::vector<double> factors;
  for (const auto& layer : layers) {
    validate(layer, k);
    validate(stim, layer.n_cells);
    const double width = pointer_uncertainties(layer, k).second;
    for (double d2q : second_differences(layer, stim, m, n)) {
      factors.push_back(damping_factor(d2q, {shape, width}, k));
    }
  }
  return report_from_factors(std::move(factors), threshold);
}

/// Count form of the criterion: prod |y| / |sin y| with y = delta2n / dn0.
inline DampingReport count_form_progress(std::span<const double> delta2n, double dn0,
                                         double threshold = kDefaultThreshold) {
  if (!(dn0 > 0.0)) throw ValidationError("count form: dn0 must be positive");
  std::vector<double> y;
  y.reserve(delta2n.size());
  for (double d : delta2n) y.push_back(d / dn0);
  return progress_from_phases(y, WindowShape::Box, threshold);
}

/// Both forms of the criterion for one layer; they coincide when
/// dn0 = dQ0 v / m_cation and dP0 = hbar / dQ0.
struct CriterionForms {
  DampingReport mass_form;
  DampingReport count_form;
  double ratio = 1.0;  // mass_form.progress / count_form.progress
};

inline CriterionForms criterion_forms(const SensoryLayer& layer, const Stimulus& stim,
                                      const std::string& outcome_m, const std::string& outcome_n,
                                      double dn0, double threshold, const PhysicalConstants& k) {
  CriterionForms out;
  out.mass_form = decoherence_progress(std::span(&layer, 1), stim, outcome_m, outcome_n,
                                       WindowShape::Box, threshold, k);
  auto d2q = second_differences(layer, stim, stim.index_of(outcome_m), stim.index_of(outcome_n));
  for (double& d : d2q) d *= layer.cell_volume / layer.cation_mass;
  out.count_form = count_form_progress(d2q, dn0, threshold);
  out.ratio = out.mass_form.progress / out.count_form.progress;
  return out;
}

/// Symmetric matrix F(m, n) of total damping between stimulus outcomes,
/// F(n, n) = 1.
inline Eigen::MatrixXd coherence_factors(std::span<const SensoryLayer> layers,
                                         const Stimulus& stim, WindowShape shape,
                                         const PhysicalConstants& k) {
  const auto n_out = static_cast<Eigen::Index>(stim.outcomes.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(n_out, n_out);
  for (Eigen::Index a = 0; a < n_out; ++a) {
    for (Eigen::Index b = a + 1; b < n_out; ++b) {
      const auto r = decoherence_progress(layers, stim, stim.outcomes[static_cast<std::size_t>(a)].label,
                                          stim.outcomes[static_cast<std::size_t>(b)].label, shape,
                                          kDefaultThreshold, k);
      const double v = r.infinite ? 0.0 : 1.0 / r.progress;
      f(a, b) = v;
      f(b, a) = v;
    }
  }
  return f;
}

/// Multiplies rho_ab by F(n_a, n_b) whenever n_a != n_b; blocks with equal
/// superposition index (and hence the diagonal) are untouched.
inline DensityMatrix apply_superselection(const DensityMatrix& rho, const Eigen::MatrixXd& factors) {
  validate(rho);
  std::size_t max_n = 0;
  for (const auto& l : rho.labels) max_n = std::max(max_n, l.n);
  if (static_cast<std::size_t>(factors.rows()) <= max_n || factors.rows() != factors.cols()) {
    throw ValidationError("apply_superselection: factor matrix does not cover every outcome index");
  }
  for (Eigen::Index a = 0; a < factors.rows(); ++a) {
    for (Eigen::Index b = 0; b < factors.cols(); ++b) {
      const double f = factors(a, b);
      if (!(f >= 0.0 && f <= 1.0) || f != factors(b, a)) {
        throw NumericalError("apply_superselection: factor matrix must be symmetric with entries in [0, 1]");
      }
    }
  }
  DensityMatrix out = rho;
  for (std::size_t a = 0; a < rho.dim(); ++a) {
    for (std::size_t b = 0; b < rho.dim(); ++b) {
      const std::size_t na = rho.labels[a].n;
      const std::size_t nb = rho.labels[b].n;
      if (na != nb) {
        out.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *=
            factors(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kinetic energy of the cation fluid in one cell

/// Scalar field sampled on a regular nx * ny * nz grid, x fastest.
struct Grid3 {
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<double> values;

  std::size_t size() const { return nx * ny * nz; }
  double operator()(std::size_t i, std::size_t j, std::size_t l) const {
    return values[(l * ny + j) * nx + i];
  }
};

namespace detail {
// Central differences inside, second-order one-sided at the edges.
inline double derivative(const Grid3& g, std::size_t i, std::size_t j, std::size_t l, int axis,
                         double h) {
  const std::size_t n = axis == 0 ? g.nx : (axis == 1 ? g.ny : g.nz);
  const std::size_t c = axis == 0 ? i : (axis == 1 ? j : l);
  auto at = [&](std::size_t pos) {
    return axis == 0 ? g(pos, j, l) : (axis == 1 ? g(i, pos, l) : g(i, j, pos));
  };
  if (n == 1) return 0.0;
  if (n == 2) return (at(1) - at(0)) / h;
  if (c == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (c == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(c + 1) - at(c - 1)) / (2.0 * h);
}
}  // namespace detail

/// Midpoint-rule quadrature of (1/2) grad P . (Q grad P) over the sampled
/// cell, each sample owning a cube of edge `spacing`.
inline double kinetic_energy(const Grid3& q_field, const Grid3& p_field, double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("kinetic_energy: spacing must be positive");
  if (q_field.nx != p_field.nx || q_field.ny != p_field.ny || q_field.nz != p_field.nz ||
      q_field.values.size() != q_field.size() || p_field.values.size() != p_field.size()) {
    throw ValidationError("kinetic_energy: Q and P grids do not match");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < p_field.nz; ++l) {
    for (std::size_t j = 0; j < p_field.ny; ++j) {
      for (std::size_t i = 0; i < p_field.nx; ++i) {
        double g2 = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
          const double d = detail::derivative(p_field, i, j, l, axis, spacing);
          g2 += d * d;
        }
        sum += 0.5 * q_field(i, j, l) * g2;
      }
    }
  }
  return sum * spacing * spacing * spacing;
}

}  // namespace rqed::decoherence
