#pragma once

#include <cmath>

#include "rqed/constants.hpp"
#include "rqed/errors.hpp"

// Steady state of the FEL-like collective instability in ion-solvated water
// along a myelinated axon segment.
namespace rqed::fel {

// Fitted prefactors of the steady-state power laws (SI).
inline constexpr double kFieldPrefactor = 2.6e-22;  // m^3 kg s^-2 A^-1
inline constexpr double kGainPrefactor = 8.1e-5;    // m^-1 s

struct AxonPreset {
  double l_a = 1e-5;      // axon diameter, m
  double l_r = 1e-3;      // myelin run length, m
  double n_ms = 100.0;    // myelin sheaths on the axon
  double N_total = 1e6;   // Na+ ions migrating per action potential
  double v_cond = 150.0;  // conduction velocity, m/s
  double dU = 0.1;        // firing/resting potential difference, V
  double E0z = 100.0;     // static field along the sheath, V/m
  double P_z = 4.9e-7;    // permanent polarization of water

  static AxonPreset reference() { return {}; }
};

inline void validate(const AxonPreset& p) {
  if (!(p.l_a > 0 && p.l_r > 0 && p.n_ms > 0 && p.v_cond > 0 && p.dU > 0 &&
        p.E0z > 0 && p.P_z > 0 && p.N_total >= 0)) {
    throw ValidationError("axon preset: lengths, n_ms, v_cond, dU, E0z and P_z must be positive");
  }
  if (p.P_z > 1.0) {
    throw ValidationError("axon preset: P_z must not exceed 1");
  }
}

struct SteadyState {
  double rho = 0.0;     // m^-3
  double P_z = 0.0;
  double A0 = 0.0;      // V s/m, saturated transverse field modulus
  double t_gain = 0.0;  // s
  double c_A = kFieldPrefactor;
  double c_t = kGainPrefactor;
};

/// Ions per sheath over the sheath volume pi l_a^2 l_r / 4.
inline double ion_density(const AxonPreset& p) {
  const double volume = kPi * p.l_a * p.l_a * p.l_r / 4.0;
  if (!(volume > 0.0) || !(p.n_ms > 0.0)) {
    throw DomainError("ion_density: sheath volume and n_ms must be positive");
  }
  return (p.N_total / p.n_ms) / volume;
}

inline SteadyState steady_state(double rho, double P_z) {
  if (!(rho > 0.0) || !(P_z > 0.0) || P_z > 1.0) {
    throw DomainError("steady_state: requires rho > 0 and 0 < P_z <= 1");
  }
  SteadyState s;
  s.rho = rho;
  s.P_z = P_z;
  s.A0 = kFieldPrefactor * std::pow(rho, 2.0 / 3.0) * std::cbrt(P_z);
  s.t_gain = kGainPrefactor / (std::cbrt(rho) * std::pow(P_z, 2.0 / 3.0));
  return s;
}

/// Gain time over the propagation time across one sheath, l_r / v_cond.
inline double timescale_ratio(const SteadyState& s, const AxonPreset& p) {
  return s.t_gain / (p.l_r / p.v_cond);
}

}  // namespace rqed::fel
