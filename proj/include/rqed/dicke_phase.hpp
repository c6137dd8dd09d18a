#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rqed/constants.hpp"
#include "rqed/errors.hpp"

// Superradiant phase transition of a Dicke-Preparata medium: critical
// density, critical temperature and the (rho, T) phase diagram.
namespace rqed::dicke {

/// Two-level quasi-particle coupled to a resonant photon polarization.
struct QuasiParticleSpec {
  double eps_gap = 0.0;             // J, = hbar Omega
  Vector3d d10 = Vector3d::Zero();  // C m, <e|d|g>
  Vector3d pol = Vector3d::UnitX(); // unit polarization
};

inline void validate(const QuasiParticleSpec& s) {
  if (!(s.eps_gap > 0.0)) {
    throw ValidationError("quasi-particle spec: eps_gap must be positive");
  }
  if (std::abs(s.pol.norm() - 1.0) > 1e-12) {
    throw ValidationError("quasi-particle spec: polarization must be a unit vector");
  }
}

enum class Phase { Normal, Superradiant };

inline const char* to_string(Phase p) {
  return p == Phase::Superradiant ? "SR" : "N";
}

struct PhasePoint {
  double rho = 0.0;  // m^-3
  double T = 0.0;    // K
  Phase phase = Phase::Normal;
};

/// rho_c = 2 eps0 eps / (pol . d10)^2
inline double critical_density(const QuasiParticleSpec& s, const PhysicalConstants& k) {
  validate(s);
  const double proj = s.pol.dot(s.d10);
  if (proj == 0.0) {
    throw DomainError("critical_density: dipole orthogonal to polarization, no finite threshold");
  }
  return 2.0 * k.eps0 * s.eps_gap / (proj * proj);
}

/// T_c(rho) = eps / (k_B ln((rho + rho_c) / (rho - rho_c))), rho > rho_c.
inline double critical_temperature(double rho, double rho_c, double eps_gap,
                                   const PhysicalConstants& k) {
  if (!(rho > rho_c) || !(rho_c > 0.0)) {
    throw DomainError("critical_temperature: rho <= rho_c, no superradiance at any temperature");
  }
  return eps_gap / (k.k_B * std::log((rho + rho_c) / (rho - rho_c)));
}

/// Superradiant iff rho > rho_c and T < T_c(rho); ties are Normal.
inline PhasePoint classify_phase(double rho, double T, const QuasiParticleSpec& s,
                                 const PhysicalConstants& k) {
  if (!(rho >= 0.0) || !(T >= 0.0)) {
    throw ValidationError("classify_phase: rho and T must be non-negative");
  }
  const double rho_c = critical_density(s, k);
  PhasePoint p{rho, T, Phase::Normal};
  if (rho > rho_c && T < critical_temperature(rho, rho_c, s.eps_gap, k)) {
    p.phase = Phase::Superradiant;
  }
  return p;
}

struct PhaseDiagram {
  std::vector<double> rho_grid;  // SI
  std::vector<double> T_grid;    // SI
  double rho_c = 0.0;
  double eps_gap = 0.0;
  // Row-major, index [i_rho * T_grid.size() + i_T].
  std::vector<PhasePoint> points;

  const PhasePoint& at(std::size_t i_rho, std::size_t i_T) const {
    return points[i_rho * T_grid.size() + i_T];
  }
  double rho_over_rhoc(std::size_t i_rho) const { return rho_grid[i_rho] / rho_c; }
  double kT_over_eps(std::size_t i_T, const PhysicalConstants& k) const {
    return k.k_B * T_grid[i_T] / eps_gap;
  }
};

namespace detail {
inline void require_ascending(const std::vector<double>& g, const char* what) {
  if (g.empty()) {
    throw ValidationError(std::string("phase_diagram: empty ") + what + " grid");
  }
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) {
      throw ValidationError(std::string("phase_diagram: ") + what + " grid must be strictly ascending");
    }
  }
}
}  // namespace detail

/// Classifies every (rho, T) pair. Each point goes through classify_phase.
inline PhaseDiagram phase_diagram(const QuasiParticleSpec& s, std::vector<double> rho_grid,
                                  std::vector<double> T_grid, const PhysicalConstants& k) {
  detail::require_ascending(rho_grid, "rho");
  detail::require_ascending(T_grid, "T");
  PhaseDiagram d;
  d.rho_c = critical_density(s, k);
  d.eps_gap = s.eps_gap;
  d.points.reserve(rho_grid.size() * T_grid.size());
  for (double rho : rho_grid) {
    for (double T : T_grid) {
      d.points.push_back(classify_phase(rho, T, s, k));
    }
  }
  d.rho_grid = std::move(rho_grid);
  d.T_grid = std::move(T_grid);
  return d;
}

/// Diagram on a grid given in normalized coordinates (rho/rho_c, k_B T/eps).
inline PhaseDiagram normalized_phase_diagram(const QuasiParticleSpec& s,
                                             const std::vector<double>& rho_rel,
                                             const std::vector<double>& kT_rel,
                                             const PhysicalConstants& k) {
  const double rho_c = critical_density(s, k);
  std::vector<double> rho(rho_rel.size());
  std::vector<double> T(kT_rel.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = rho_rel[i] * rho_c;
  for (std::size_t i = 0; i < T.size(); ++i) T[i] = kT_rel[i] * s.eps_gap / k.k_B;
  return phase_diagram(s, std::move(rho), std::move(T), k);
}

}  // namespace rqed::dicke
