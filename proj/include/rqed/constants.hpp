#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "rqed/errors.hpp"

namespace rqed {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4d = Eigen::Matrix4d;
using Vector3d = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// SI constants shared by every module. All values are plain doubles in SI
/// units; overriding any of them (e.g. natural units) is allowed.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;   // J s
  double k_B = 1.380649e-23;       // J/K
  double eps0 = 8.8541878128e-12;  // F/m
  double mu0 = 1.25663706212e-6;   // H/m
  double c = 299792458.0;          // m/s
  // Rotational gap of water for the average moment of inertia,
  // eps_w / (hbar c) = 160 cm^-1.
  double eps_w = 1.6e4 * 1.054571817e-34 * 299792458.0;  // J
  // Decoherence time of neural superpositions. Imported, never derived.
  double t_dec = 1e-20;  // s
};

inline void validate(const PhysicalConstants& k) {
  const std::array<double, 7> values{k.hbar, k.k_B, k.eps0, k.mu0,
                                     k.c,    k.eps_w, k.t_dec};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("physical constants must be finite and strictly positive");
    }
  }
}

/// Energy-spin operators in the (|e>, |g>) basis.
struct SpinMatrices {
  Matrix2c s1;
  Matrix2c s2;
  Matrix2c s3;

  const Matrix2c& operator[](int a) const {
    return a == 0 ? s1 : (a == 1 ? s2 : s3);
  }
};

inline SpinMatrices energy_spin_matrices() {
  const Complex i{0.0, 1.0};
  SpinMatrices s;
  // |e> = (1,0), |g> = (0,1)
  s.s1 << 0.0, 0.5, 0.5, 0.0;
  s.s2 << 0.0, -0.5 * i, 0.5 * i, 0.0;
  s.s3 << 0.5, 0.0, 0.0, -0.5;
  return s;
}

/// Resonant wavelength l_c = 2 pi hbar c / eps_w (the coherence length).
inline double coherence_length(const PhysicalConstants& k) {
  if (!(k.eps_w > 0.0)) {
    throw DomainError("coherence_length: energy gap must be positive");
  }
  return kTwoPi * k.hbar * k.c / k.eps_w;
}

/// Rigid-rotor water molecule: 4-level free part, dipole truncated to the
/// two lowest levels, driven by a classical vector potential a_ext.
struct RotorModel {
  double d_tilde0 = 0.0;  // C m
  Vector3d a_ext = Vector3d::Zero();  // V s/m
};

struct RotorHamiltonians {
  // Basis (|1,1>, |1,0>, |1,-1>, |0,0>).
  Matrix4d h_free;
  Matrix2c h_int;
  // Time derivative of the truncated dipole, one 2x2 matrix per axis.
  std::array<Matrix2c, 3> d_dot;
};

/// Truncated dipole operator vector (-d0 s1, -d0 s2, 0).
inline std::array<Matrix2c, 3> truncated_dipole(double d_tilde0) {
  const auto s = energy_spin_matrices();
  return {-d_tilde0 * s.s1, -d_tilde0 * s.s2, Matrix2c::Zero()};
}

inline RotorHamiltonians rotor_hamiltonians(const RotorModel& model,
                                            const PhysicalConstants& k) {
  const auto s = energy_spin_matrices();
  const Complex i{0.0, 1.0};
  RotorHamiltonians out;
  out.h_free = Matrix4d::Zero();
  out.h_free.diagonal() << 1.0, 1.0, 1.0, -1.0;
  out.h_free *= 0.5 * k.eps_w;

  // On the truncated space the free part acts as eps_w s3 up to a constant,
  // since [I_{3,1}/2, s^a] = [s^3, s^a].
  const Matrix2c h2 = k.eps_w * s.s3;
  const auto d_tr = truncated_dipole(model.d_tilde0);
  out.h_int = Matrix2c::Zero();
  for (int a = 0; a < 3; ++a) {
    out.d_dot[a] = (i / k.hbar) * (h2 * d_tr[a] - d_tr[a] * h2);
    out.h_int -= model.a_ext[a] * out.d_dot[a];
  }
  return out;
}

}  // namespace rqed
