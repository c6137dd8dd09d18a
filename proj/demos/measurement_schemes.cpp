// Runs both measurement schemes on a three-way superposition and compares
// the outcome statistics and the energy booked for the readings.
#include <cstdio>

#include "rqed/measurement.hpp"

int main() {
  using namespace rqed;
  using namespace rqed::measurement;
  const std::vector<Complex> amplitudes{Complex(0.6, 0.0), Complex(0.0, 0.64), Complex(0.48, 0.0)};
  for (auto scheme : {Scheme::TypeI, Scheme::TypeII}) {
    const auto rho0 = init_scheme(amplitudes, scheme);
    const auto rho1 = nonselective_step(rho0);
    const auto rho2 = feedback_step(rho1, default_feedback(scheme, amplitudes.size(), rho0.labels[0].pattern));
    std::printf("type %s: purity %.3f -> %.3f, max coherence %.3f -> %.3f\n", to_string(scheme), rho0.purity(),
                rho2.purity(), rho0.max_offdiagonal(), rho2.max_offdiagonal());
    Rng rng(1);
    EnergyLedger ledger;
    const auto counts = read_many(rho2, scheme, 10000, rng, ledger);
    for (std::size_t a = 0; a < counts.size(); ++a) {
      std::printf("  %-16s p = %.4f  observed %.4f\n", label_string(rho2.labels[a], scheme).c_str(),
                  rho2.diagonal_weights()[a], counts[a] / 1e4);
    }
    std::printf("  energy for 10000 readings: %.4e J\n", ledger.total());
  }
}
