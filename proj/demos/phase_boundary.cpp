// Prints the superradiant boundary T_c(rho) for water-like elements.
#include <cstdio>

#include "rqed/dicke_phase.hpp"
#include "rqed/numeric.hpp"

int main() {
  using namespace rqed;
  const PhysicalConstants k;
  const dicke::QuasiParticleSpec water{k.eps_w, Vector3d(6.2e-30, 0, 0), Vector3d::UnitX()};
  const double rc = dicke::critical_density(water, k);
  std::printf("rho_c = %.4g m^-3\n", rc);
  std::printf("%12s %12s\n", "rho/rho_c", "T_c [K]");
  for (double r : linspace(1.25, 5.0, 16)) {
    std::printf("%12.4f %12.2f\n", r, dicke::critical_temperature(r * rc, rc, water.eps_gap, k));
  }
}
