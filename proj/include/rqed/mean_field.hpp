#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rqed/constants.hpp"
#include "rqed/dicke_phase.hpp"
#include "rqed/errors.hpp"

// Mean-field (vacuum expectation value) dynamics of resonant photon modes
// coupled to two-level energy spins. Operator products in the Heisenberg
// equations are factorized, <AB> -> <A><B>, which leaves a classical
// Hamiltonian system: complex canonical pairs (q_k, p_k) and spins obeying
// ds/dt = h x s.
//
// Internally time is measured in units of 1/Omega; eom_rhs returns
// derivatives with respect to tau = Omega t. Amplitudes q, p and spins are
// dimensionless already.
namespace rqed::mean_field {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct Mode {
  Vector3d k = Vector3d::Zero();  // 1/m
  Vector3d pol = Vector3d::UnitX();
};

struct ModeSet {
  std::vector<Mode> modes;
  std::vector<std::size_t> partner;  // partner[a] is the index of -k_a
  std::vector<Vector3d> positions;   // element positions, m
  double omega = 0.0;                // rad/s, common resonance
  double eps_gap = 0.0;              // J, = hbar omega
  double volume = 0.0;               // m^3
  MatrixXd lambdas;                  // [mode, element], 1/s
  MatrixXcd phases;                  // [mode, element], exp(-i k.x)

  std::size_t n_modes() const { return modes.size(); }
  std::size_t n_elements() const { return positions.size(); }
};

struct MeanFieldState {
  VectorXcd q;                     // <q_k>
  VectorXcd p;                     // <p_k>
  std::vector<Vector3d> spins;     // (s1, s2, s3) per element
  std::vector<Vector3d> positions; // m
  double time = 0.0;               // s
};

/// d/dtau of every component, tau = Omega t.
struct Rates {
  VectorXcd q;
  VectorXcd p;
  std::vector<Vector3d> spins;

  double max_abs() const {
    double m = 0.0;
    for (Eigen::Index a = 0; a < q.size(); ++a) {
      m = std::max({m, std::abs(q[a].real()), std::abs(q[a].imag()),
                    std::abs(p[a].real()), std::abs(p[a].imag())});
    }
    for (const auto& s : spins) m = std::max(m, s.cwiseAbs().maxCoeff());
    return m;
  }
};

struct VevAnsatz {
  double v_amp = 0.0;
  double theta0 = 0.0;  // rad, in [0, 2 pi)
};

inline constexpr double kResonanceTolerance = 1e-9;
inline constexpr double kRealityTolerance = 1e-10;
inline constexpr double kSpinNormSlack = 1e-9;
inline constexpr double kMaxStepOmega = 0.1;

/// Builds the coupled mode set. Every k must lie on the resonance shell
/// |k| = Omega / c and appear together with -k (same polarization); all
/// elements share one gap eps = hbar Omega.
inline ModeSet make_modes(std::span<const dicke::QuasiParticleSpec> elements,
                          std::span<const Vector3d> positions, double volume,
                          std::span<const Mode> modes, const PhysicalConstants& k) {
  if (elements.empty() || elements.size() != positions.size()) {
    throw ValidationError("make_modes: need one position per element and at least one element");
  }
  if (modes.empty()) throw ValidationError("make_modes: empty mode list");
  if (!(volume > 0.0)) throw ValidationError("make_modes: volume must be positive");

  const double eps = elements.front().eps_gap;
  if (!(eps > 0.0)) throw ValidationError("make_modes: eps_gap must be positive");
  for (const auto& e : elements) {
    if (std::abs(e.eps_gap - eps) > 1e-12 * eps) {
      throw ValidationError("make_modes: elements must share one resonant gap");
    }
  }

  ModeSet m;
  m.eps_gap = eps;
  m.omega = eps / k.hbar;
  m.volume = volume;
  m.modes.assign(modes.begin(), modes.end());
  m.positions.assign(positions.begin(), positions.end());

  const double k_shell = m.omega / k.c;
  for (std::size_t a = 0; a < m.modes.size(); ++a) {
    const auto& md = m.modes[a];
    if (std::abs(md.k.norm() - k_shell) > kResonanceTolerance * k_shell) {
      throw ValidationError("make_modes: mode " + std::to_string(a) +
                            " is off resonance, |k| must equal Omega/c");
    }
    if (std::abs(md.pol.norm() - 1.0) > 1e-12) {
      throw ValidationError("make_modes: mode " + std::to_string(a) + " polarization is not a unit vector");
    }
    if (std::abs(md.pol.dot(md.k)) > kResonanceTolerance * k_shell) {
      throw ValidationError("make_modes: mode " + std::to_string(a) + " polarization is not transverse");
    }
  }

  m.partner.assign(m.modes.size(), m.modes.size());
  for (std::size_t a = 0; a < m.modes.size(); ++a) {
    for (std::size_t b = 0; b < m.modes.size(); ++b) {
      if (a == b) continue;
      const bool opposite = (m.modes[a].k + m.modes[b].k).norm() <= kResonanceTolerance * k_shell;
      const bool same_pol = (m.modes[a].pol - m.modes[b].pol).norm() <= 1e-12;
      if (opposite && same_pol) {
        if (m.partner[a] != m.modes.size()) {
          throw ValidationError("make_modes: mode " + std::to_string(a) + " has more than one -k partner");
        }
        m.partner[a] = b;
      }
    }
    if (m.partner[a] == m.modes.size()) {
      throw ValidationError("make_modes: mode " + std::to_string(a) + " has no -k partner");
    }
  }

  const double scale = -std::sqrt(m.omega / (k.eps0 * k.hbar * volume));
  const auto n_modes = static_cast<Eigen::Index>(m.modes.size());
  const auto n_el = static_cast<Eigen::Index>(elements.size());
  m.lambdas.resize(n_modes, n_el);
  m.phases.resize(n_modes, n_el);
  for (Eigen::Index a = 0; a < n_modes; ++a) {
    for (Eigen::Index i = 0; i < n_el; ++i) {
      m.lambdas(a, i) = scale * m.modes[a].pol.dot(elements[i].d10);
      m.phases(a, i) = std::polar(1.0, -m.modes[a].k.dot(m.positions[i]));
    }
  }
  return m;
}

namespace detail {

inline void check_shapes(const MeanFieldState& s, const ModeSet& m) {
  if (static_cast<std::size_t>(s.q.size()) != m.n_modes() ||
      static_cast<std::size_t>(s.p.size()) != m.n_modes() ||
      s.spins.size() != m.n_elements() || s.positions.size() != m.n_elements()) {
    throw ValidationError("mean-field state does not match the mode set dimensions");
  }
}

// Packed layout: [Re q, Im q, Re p, Im p, s (3 per element)].
inline VectorXd pack(const MeanFieldState& s) {
  const Eigen::Index nm = s.q.size();
  const auto ne = static_cast<Eigen::Index>(s.spins.size());
  VectorXd y(4 * nm + 3 * ne);
  y.segment(0, nm) = s.q.real();
  y.segment(nm, nm) = s.q.imag();
  y.segment(2 * nm, nm) = s.p.real();
  y.segment(3 * nm, nm) = s.p.imag();
  for (Eigen::Index i = 0; i < ne; ++i) y.segment<3>(4 * nm + 3 * i) = s.spins[i];
  return y;
}

inline void unpack(const VectorXd& y, MeanFieldState& s) {
  const Eigen::Index nm = s.q.size();
  for (Eigen::Index a = 0; a < nm; ++a) {
    s.q[a] = {y[a], y[nm + a]};
    s.p[a] = {y[2 * nm + a], y[3 * nm + a]};
  }
  for (std::size_t i = 0; i < s.spins.size(); ++i) {
    s.spins[i] = y.segment<3>(4 * nm + 3 * static_cast<Eigen::Index>(i));
  }
}

// Right-hand side on the packed vector, d/dtau with lambda in units of Omega.
inline void rhs_packed(const ModeSet& m, const VectorXd& y, VectorXd& dy) {
  const auto nm = static_cast<Eigen::Index>(m.n_modes());
  const auto ne = static_cast<Eigen::Index>(m.n_elements());
  const double inv_omega = 1.0 / m.omega;
  dy.resize(y.size());

  auto q = [&](Eigen::Index a) { return Complex{y[a], y[nm + a]}; };
  auto p = [&](Eigen::Index a) { return Complex{y[2 * nm + a], y[3 * nm + a]}; };
  auto spin = [&](Eigen::Index i, int c) { return y[4 * nm + 3 * i + c]; };

  // dq_k = p_{-k} - sum_i lam_{k,i} s1_i e^{-ik.x_i}
  // dp_{-k} = -q_k + sum_i lam_{k,i} s2_i e^{-ik.x_i}
  for (Eigen::Index a = 0; a < nm; ++a) {
    const auto b = static_cast<Eigen::Index>(m.partner[a]);
    Complex src1{0.0, 0.0};
    Complex src2{0.0, 0.0};
    for (Eigen::Index i = 0; i < ne; ++i) {
      const Complex w = m.lambdas(a, i) * inv_omega * m.phases(a, i);
      src1 += w * spin(i, 0);
      src2 += w * spin(i, 1);
    }
    const Complex dq = p(b) - src1;
    const Complex dp = -q(a) + src2;
    dy[a] = dq.real();
    dy[nm + a] = dq.imag();
    dy[2 * nm + b] = dp.real();
    dy[3 * nm + b] = dp.imag();
  }

  // Spins precess about h = (-B1, -B2, 1) with
  // B1 = sum_k lam p_k e^{-ik.x}, B2 = sum_k lam q_{-k} e^{-ik.x};
  // both are real once the +-k terms are paired.
  for (Eigen::Index i = 0; i < ne; ++i) {
    Complex b1{0.0, 0.0};
    Complex b2{0.0, 0.0};
    for (Eigen::Index a = 0; a < nm; ++a) {
      const Complex w = m.lambdas(a, i) * inv_omega * m.phases(a, i);
      b1 += w * p(a);
      b2 += w * q(static_cast<Eigen::Index>(m.partner[a]));
    }
    const double B1 = b1.real();
    const double B2 = b2.real();
    const double s1 = spin(i, 0);
    const double s2 = spin(i, 1);
    const double s3 = spin(i, 2);
    dy[4 * nm + 3 * i + 0] = -s2 - B2 * s3;
    dy[4 * nm + 3 * i + 1] = s1 + B1 * s3;
    dy[4 * nm + 3 * i + 2] = B2 * s1 - B1 * s2;
  }
}

inline void symmetrize(const ModeSet& m, MeanFieldState& s) {
  for (std::size_t a = 0; a < m.n_modes(); ++a) {
    const std::size_t b = m.partner[a];
    if (a > b) continue;
    const Complex qa = 0.5 * (s.q[a] + std::conj(s.q[b]));
    const Complex pa = 0.5 * (s.p[a] + std::conj(s.p[b]));
    s.q[a] = qa;
    s.q[b] = std::conj(qa);
    s.p[a] = pa;
    s.p[b] = std::conj(pa);
  }
}

}  // namespace detail

/// Largest violation of q_{-k} = conj(q_k), p_{-k} = conj(p_k).
inline double reality_violation(const MeanFieldState& s, const ModeSet& m) {
  double v = 0.0;
  for (std::size_t a = 0; a < m.n_modes(); ++a) {
    const std::size_t b = m.partner[a];
    v = std::max(v, std::abs(s.q[b] - std::conj(s.q[a])));
    v = std::max(v, std::abs(s.p[b] - std::conj(s.p[a])));
  }
  return v;
}

inline void validate(const MeanFieldState& s, const ModeSet& m) {
  detail::check_shapes(s, m);
  for (std::size_t i = 0; i < s.positions.size(); ++i) {
    if (s.positions[i] != m.positions[i]) {
      throw ValidationError("mean-field state: element positions differ from the mode set");
    }
    if (s.spins[i].norm() > 0.5 + kSpinNormSlack) {
      throw ValidationError("mean-field state: spin " + std::to_string(i) + " exceeds |s| = 1/2");
    }
  }
  if (reality_violation(s, m) > kRealityTolerance) {
    throw ValidationError("mean-field state: amplitudes violate q_{-k} = conj(q_k)");
  }
}

/// Fresh state on the mode set: zero field, spins as given.
inline MeanFieldState make_state(const ModeSet& m, std::vector<Vector3d> spins) {
  MeanFieldState s;
  s.q = VectorXcd::Zero(static_cast<Eigen::Index>(m.n_modes()));
  s.p = VectorXcd::Zero(static_cast<Eigen::Index>(m.n_modes()));
  s.spins = std::move(spins);
  s.positions = m.positions;
  detail::check_shapes(s, m);
  return s;
}

inline Rates eom_rhs(const MeanFieldState& s, const ModeSet& m) {
  detail::check_shapes(s, m);
  VectorXd dy;
  detail::rhs_packed(m, detail::pack(s), dy);
  MeanFieldState tmp = s;
  detail::unpack(dy, tmp);
  return {std::move(tmp.q), std::move(tmp.p), std::move(tmp.spins)};
}

/// Total energy in J (real part after +-k pairing).
inline double hamiltonian(const MeanFieldState& s, const ModeSet& m, const PhysicalConstants& k) {
  detail::check_shapes(s, m);
  Complex field{0.0, 0.0};
  Complex coupling{0.0, 0.0};
  for (std::size_t a = 0; a < m.n_modes(); ++a) {
    const std::size_t b = m.partner[a];
    field += s.p[b] * s.p[a] + s.q[a] * s.q[b];
    for (std::size_t i = 0; i < m.n_elements(); ++i) {
      const auto ai = static_cast<Eigen::Index>(a);
      const auto ii = static_cast<Eigen::Index>(i);
      coupling += m.lambdas(ai, ii) * (s.q[b] * s.spins[i][1] + s.p[a] * s.spins[i][0]) *
                  m.phases(ai, ii);
    }
  }
  double spin_energy = 0.0;
  for (const auto& sp : s.spins) spin_energy += sp[2];
  return 0.5 * k.hbar * m.omega * field.real() + m.eps_gap * spin_energy -
         k.hbar * coupling.real();
}

/// Global U(1) rotation, a symmetry of the Hamiltonian:
/// (q_k, p_{-k}) and (s1, s2) rotate together by theta, s3 is fixed.
inline MeanFieldState u1_transform(const MeanFieldState& s, const ModeSet& m, double theta) {
  detail::check_shapes(s, m);
  MeanFieldState out = s;
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  for (std::size_t a = 0; a < m.n_modes(); ++a) {
    const std::size_t b = m.partner[a];
    out.q[a] = s.q[a] * c - s.p[b] * sn;
    out.p[b] = s.q[a] * sn + s.p[b] * c;
  }
  for (auto& sp : out.spins) {
    const double s1 = sp[0];
    const double s2 = sp[1];
    sp[0] = s1 * c + s2 * sn;
    sp[1] = -s1 * sn + s2 * c;
  }
  return out;
}

/// Time-independent solution with spontaneously broken U(1):
///   q_k = (v sin th0 / Omega) sum_i lam_{k,i} e^{-ik.x_i}
///   p_{-k} = (v cos th0 / Omega) sum_i lam_{k,i} e^{-ik.x_i}
///   s1 = v cos th0, s2 = v sin th0, s3_i = -Omega^2 / D_i
/// with D_i = sum_k lam_{k,i} sum_j lam_{k,j} e^{-ik.(x_i - x_j)}.
inline MeanFieldState stationary_state(const VevAnsatz& ansatz, const ModeSet& m) {
  if (!(ansatz.v_amp >= 0.0) || !(ansatz.theta0 >= 0.0) || !(ansatz.theta0 < kTwoPi)) {
    throw ValidationError("stationary_state: need v >= 0 and 0 <= theta0 < 2 pi");
  }
  const auto nm = static_cast<Eigen::Index>(m.n_modes());
  const auto ne = static_cast<Eigen::Index>(m.n_elements());
  const MatrixXcd weights = (m.lambdas / m.omega).cast<Complex>().cwiseProduct(m.phases);
  const VectorXcd collective = weights.rowwise().sum();  // per mode

  MeanFieldState s = make_state(m, std::vector<Vector3d>(m.n_elements(), Vector3d::Zero()));
  const double vs = ansatz.v_amp * std::sin(ansatz.theta0);
  const double vc = ansatz.v_amp * std::cos(ansatz.theta0);
  for (Eigen::Index a = 0; a < nm; ++a) {
    const auto b = static_cast<Eigen::Index>(m.partner[a]);
    s.q[a] = vs * collective[a];
    s.p[b] = vc * collective[a];
  }
  for (Eigen::Index i = 0; i < ne; ++i) {
    // Dimensionless D_i / Omega^2 and a scale for the degeneracy test.
    Complex d{0.0, 0.0};
    double scale = 0.0;
    for (Eigen::Index a = 0; a < nm; ++a) {
      const auto b = static_cast<Eigen::Index>(m.partner[a]);
      d += weights(a, i) * collective[b];
      scale += std::abs(weights(a, i)) * weights.row(b).cwiseAbs().sum();
    }
    if (scale == 0.0 || std::abs(d.real()) <= 1e-12 * scale) {
      throw DomainError("stationary_state: degenerate geometry, sum_k lam_{k,i} sum_j lam_{k,j} "
                        "e^{-ik.(x_i-x_j)} vanishes for element " + std::to_string(i));
    }
    s.spins[static_cast<std::size_t>(i)] = Vector3d{vc, vs, -1.0 / d.real()};
  }
  detail::symmetrize(m, s);
  for (std::size_t i = 0; i < s.spins.size(); ++i) {
    if (s.spins[i].norm() > 0.5 + kSpinNormSlack) {
      throw DomainError("stationary_state: element " + std::to_string(i) +
                        " would need |s| > 1/2; coupling too weak or v too large");
    }
  }
  return s;
}

struct IntegrateOptions {
  std::size_t record_every = 1;  // keep every n-th step (the final step is always kept)
};

using Trajectory = std::vector<MeanFieldState>;

/// Fixed-step RK4 in tau = Omega t. The reality constraint is re-imposed
/// after every step. Requires dt Omega < 0.1.
inline Trajectory integrate(const MeanFieldState& initial, const ModeSet& m, double dt,
                            std::size_t steps, IntegrateOptions opts = {}) {
  validate(initial, m);
  const double h = dt * m.omega;
  if (!(h > 0.0) || !(h < kMaxStepOmega)) {
    throw ValidationError("integrate: dt * Omega = " + std::to_string(h) +
                          " violates 0 < dt*Omega < 0.1; try dt = " + std::to_string(0.01 / m.omega) +
                          " s");
  }
  if (opts.record_every == 0) opts.record_every = 1;

  Trajectory traj;
  traj.reserve(steps / opts.record_every + 2);
  traj.push_back(initial);

  MeanFieldState cur = initial;
  VectorXd y = detail::pack(cur);
  VectorXd k1, k2, k3, k4, tmp;
  for (std::size_t n = 1; n <= steps; ++n) {
    detail::rhs_packed(m, y, k1);
    tmp = y + 0.5 * h * k1;
    detail::rhs_packed(m, tmp, k2);
    tmp = y + 0.5 * h * k2;
    detail::rhs_packed(m, tmp, k3);
    tmp = y + h * k3;
    detail::rhs_packed(m, tmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    detail::unpack(y, cur);
    detail::symmetrize(m, cur);
    y = detail::pack(cur);
    cur.time = initial.time + static_cast<double>(n) * dt;
    if (!y.allFinite()) {
      throw NumericalError("integrate: non-finite state at step " + std::to_string(n));
    }
    if (n % opts.record_every == 0 || n == steps) traj.push_back(cur);
  }
  return traj;
}

/// Classical field A_c(x) = Re sum_k sqrt(hbar/(eps0 Omega V)) q_k pol_k e^{ik.x}.
inline std::vector<Vector3d> field_profile(const MeanFieldState& s, const ModeSet& m,
                                           const PhysicalConstants& k,
                                           std::span<const Vector3d> points) {
  detail::check_shapes(s, m);
  const double amp = std::sqrt(k.hbar / (k.eps0 * m.omega * m.volume));
  std::vector<Vector3d> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    Eigen::Vector3cd a = Eigen::Vector3cd::Zero();
    for (std::size_t md = 0; md < m.n_modes(); ++md) {
      a += (amp * s.q[static_cast<Eigen::Index>(md)] *
            std::polar(1.0, m.modes[md].k.dot(x))) * m.modes[md].pol.cast<Complex>();
    }
    out.push_back(a.real());
  }
  return out;
}

inline std::vector<double> spin_norms(const MeanFieldState& s) {
  std::vector<double> n;
  n.reserve(s.spins.size());
  for (const auto& sp : s.spins) n.push_back(sp.norm());
  return n;
}

}  // namespace rqed::mean_field
