#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rqed/domain_lattice.hpp"

// Independent reference computations shared by the unit tests and the
// acceptance binary.
namespace rqed::testing {

/// |(1/2) int_{-1}^{1} e^{i x u} du|: characteristic function of a uniform
/// momentum window of half-width 1.
inline double box_quadrature(double x) {
  using boost::math::quadrature::gauss_kronrod;
  const double re = gauss_kronrod<double, 61>::integrate([x](double u) { return 0.5 * std::cos(x * u); },
                                                         -1.0, 1.0, 15, 1e-15);
  const double im = gauss_kronrod<double, 61>::integrate([x](double u) { return 0.5 * std::sin(x * u); },
                                                         -1.0, 1.0, 15, 1e-15);
  return std::hypot(re, im);
}

/// Same for a unit-variance Gaussian window.
inline double gaussian_quadrature(double x) {
  using boost::math::quadrature::gauss_kronrod;
  const double norm = 1.0 / std::sqrt(2.0 * kPi);
  const double inf = std::numeric_limits<double>::infinity();
  const double re = gauss_kronrod<double, 61>::integrate(
      [x, norm](double u) { return norm * std::exp(-0.5 * u * u) * std::cos(x * u); }, -inf, inf, 15, 1e-15);
  return std::abs(re);
}

/// SR iff rho > rho_c and k_B T ln((rho + rho_c)/(rho - rho_c)) < eps.
inline std::uint8_t oracle_bit(double rho, double T, const dicke::QuasiParticleSpec& s,
                               const PhysicalConstants& k) {
  const double proj = s.pol.dot(s.d10);
  const double rc = 2.0 * k.eps0 * s.eps_gap / (proj * proj);
  if (!(rho > rc)) return 0;
  return k.k_B * T * std::log((rho + rc) / (rho - rc)) < s.eps_gap ? 1 : 0;
}

/// Per-domain brute force for l_c = 1: every sample is tested against every
/// domain cube.
inline std::vector<std::uint8_t> brute_force_bits(const lattice::LatticeSpec& spec,
                                                  const lattice::BoundaryField& f,
                                                  const lattice::Dims& dims, const PhysicalConstants& k) {
  std::vector<std::uint8_t> bits;
  for (std::size_t dz = 0; dz < dims[2]; ++dz)
    for (std::size_t dy = 0; dy < dims[1]; ++dy)
      for (std::size_t dx = 0; dx < dims[0]; ++dx) {
        const std::size_t d[3] = {dx, dy, dz};
        double rho = 0.0, T = 0.0;
        std::size_t n = 0;
        for (std::size_t s = 0; s < f.size(); ++s) {
          const std::size_t idx[3] = {s % f.samples[0], (s / f.samples[0]) % f.samples[1],
                                      s / (f.samples[0] * f.samples[1])};
          bool inside = true;
          for (int a = 0; a < 3; ++a) {
            const double x = (static_cast<double>(idx[a]) + 0.5) * spec.extents[a] /
                             static_cast<double>(f.samples[static_cast<std::size_t>(a)]);
            inside = inside && x >= static_cast<double>(d[a]) && x < static_cast<double>(d[a] + 1);
          }
          if (inside) {
            rho += f.rho[s];
            T += f.T[s];
            ++n;
          }
        }
        bits.push_back(oracle_bit(rho / static_cast<double>(n), T / static_cast<double>(n), spec.spec, k));
      }
  return bits;
}

}  // namespace rqed::testing
