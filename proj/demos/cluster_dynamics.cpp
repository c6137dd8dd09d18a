// Five elements coupled to one +-k mode pair, started off the stationary
// branch. Prints the inversion and the field amplitude every 100 steps.
#include <cmath>
#include <cstdio>

#include "rqed/mean_field.hpp"

int main() {
  using namespace rqed;
  using namespace rqed::mean_field;
  const PhysicalConstants k;
  const double omega = k.eps_w / k.hbar;
  const double kk = omega / k.c;
  const double d = 6.2e-30;
  const double coupling = 0.6;  // |lambda| / Omega
  const double volume = d * d / (omega * k.eps0 * k.hbar * coupling * coupling);

  std::vector<dicke::QuasiParticleSpec> elements(5, {k.eps_w, Vector3d(d, 0, 0), Vector3d::UnitX()});
  std::vector<Vector3d> positions;
  for (int i = 0; i < 5; ++i) positions.push_back(Vector3d(0.013, 0.01, 0.05) * (i * kTwoPi / kk));
  const std::vector<Mode> modes{{Vector3d(0, 0, kk), Vector3d::UnitX()}, {Vector3d(0, 0, -kk), Vector3d::UnitX()}};
  const auto m = make_modes(elements, positions, volume, modes, k);

  std::vector<Vector3d> spins;
  for (int i = 0; i < 5; ++i) {
    const double a = 0.3 + 0.1 * i;
    spins.push_back(0.5 * Vector3d(std::sin(a) * std::cos(i), std::sin(a) * std::sin(i), -std::cos(a)));
  }
  auto s = make_state(m, spins);
  s.q[0] = Complex(0.3, 0.1);
  s.q[1] = std::conj(s.q[0]);
  s.p[0] = Complex(-0.2, 0.05);
  s.p[1] = std::conj(s.p[0]);

  const double e0 = hamiltonian(s, m, k);
  const auto traj = integrate(s, m, 0.01 / omega, 5000, {100});
  std::printf("%8s %12s %12s %12s\n", "Omega t", "sum s3", "|q_+k|", "dE/E");
  for (const auto& st : traj) {
    double s3 = 0.0;
    for (const auto& v : st.spins) s3 += v.z();
    std::printf("%8.2f %12.6f %12.6f %12.3e\n", st.time * omega, s3, std::abs(st.q[0]),
                (hamiltonian(st, m, k) - e0) / std::abs(e0));
  }
}
