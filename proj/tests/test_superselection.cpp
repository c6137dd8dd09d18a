#include <gtest/gtest.h>

#include <cmath>

#include "rqed/random.hpp"
#include "rqed/superselection.hpp"
#include "oracles.hpp"

using namespace rqed;
using namespace rqed::decoherence;
using rqed::testing::box_quadrature;
using rqed::testing::gaussian_quadrature;

namespace {

Stimulus two_level(double value_on = 1.0) {
  Stimulus s;
  s.outcomes = {{"off", 0.0, {}}, {"on", value_on, {}}};
  s.energy_maps = {linear_energy(1.0)};
  return s;
}

void activate_all(Stimulus& s, std::size_t n) {
  for (auto& o : s.outcomes) {
    o.active_cells.clear();
    for (std::size_t j = 0; j < n; ++j) o.active_cells.push_back(j);
  }
}

}  // namespace

TEST(Diffusion, HairCellNumbers) {
  EXPECT_NEAR(diffusion_time(0.5e-6, 1.3e-9), 3.2e-5, 0.05 * 3.2e-5);
  EXPECT_EQ(diffusion_time(0.0, 1.3e-9), 0.0);
  EXPECT_NEAR(diffusion_prefactor(1.3e-9) * 1e6, 88.0, 0.02 * 88.0);
  const double t = diffusion_time(0.5e-6, 1.3e-9);
  EXPECT_NEAR(diffusion_distance(t, 1.3e-9), 0.5e-6, 1e-15 * 0.5e-6);
  EXPECT_THROW(diffusion_time(1.0, 0.0), DomainError);
  EXPECT_THROW(diffusion_time(1.0, -1.0), DomainError);
}

TEST(Diffusion, InfluxFloor) {
  // Endolymph concentration in um^-3 times tip-link volume in um^3.
  EXPECT_NEAR(influx_floor(1e5, 1e-2), 1e3, 1e-9);
  EXPECT_THROW(influx_floor(-1.0, 1.0), DomainError);
}

TEST(Transduce, ZeroStimulusAndLinearity) {
  SensoryLayer layer;
  layer.n_cells = 4;
  layer.lambda_gain = 2.0;
  layer.dt_window = 0.5;
  layer.dQ0 = 1.0;
  layer.cell_volume = 3.0;
  layer.cation_mass = 1.5;
  auto stim = two_level(0.7);
  stim.outcomes[1].active_cells = {0, 2};

  const auto off = transduce(layer, stim, "off");
  for (double q : off.delta_q) EXPECT_EQ(q, 0.0);

  const auto on = transduce(layer, stim, "on");
  EXPECT_DOUBLE_EQ(on.delta_q[0], 2.0 * 0.7 * 0.5);
  EXPECT_EQ(on.delta_q[1], 0.0);
  EXPECT_DOUBLE_EQ(on.delta_n[2], on.delta_q[2] * 3.0 / 1.5);

  auto l2 = layer;
  l2.lambda_gain *= 2.0;
  auto l3 = layer;
  l3.dt_window *= 2.0;
  EXPECT_DOUBLE_EQ(transduce(l2, stim, "on").delta_q[0], 2.0 * on.delta_q[0]);
  EXPECT_DOUBLE_EQ(transduce(l3, stim, "on").delta_q[2], 2.0 * on.delta_q[2]);

  EXPECT_THROW(transduce(layer, stim, "loud"), ValidationError);
}

TEST(Stimulus, EnergyMapMustVanishAtZero) {
  Stimulus s = two_level();
  s.energy_maps = {[](double o) { return o + 1.0; }};
  EXPECT_THROW(validate(s, 1), ValidationError);
  s.energy_maps = {power_energy(2.0, 0.5)};
  EXPECT_NO_THROW(validate(s, 1));
  EXPECT_EQ(s.energy_maps[0](0.0), 0.0);
  EXPECT_DOUBLE_EQ(s.energy_maps[0](-4.0), -4.0);
}

TEST(DampingFactor, BoxMatchesQuadrature) {
  for (int n = 0; n < 20; ++n) {
    const double x = 0.05 + 0.37 * n;
    EXPECT_NEAR(damping_from_phase(x, WindowShape::Box), box_quadrature(x), 1e-12) << "x = " << x;
    EXPECT_NEAR(damping_from_phase(x, WindowShape::Box), std::abs(std::sin(x)) / x, 1e-15);
  }
}

TEST(DampingFactor, GaussianMatchesQuadrature) {
  EXPECT_NEAR(damping_from_phase(1.0, WindowShape::Gaussian), 0.6065306597, 1e-10);
  for (double x : {0.0, 0.3, 1.0, 2.2, 4.0}) {
    EXPECT_NEAR(damping_from_phase(x, WindowShape::Gaussian), gaussian_quadrature(x), 1e-10);
  }
}

TEST(DampingFactor, LimitsAndZeros) {
  EXPECT_EQ(damping_from_phase(0.0, WindowShape::Box), 1.0);
  EXPECT_NEAR(damping_from_phase(1e-9, WindowShape::Box), 1.0, 1e-15);
  EXPECT_EQ(damping_from_phase(kPi, WindowShape::Box), 0.0);
  EXPECT_EQ(damping_from_phase(-2.0 * kPi, WindowShape::Box), 0.0);
  const PhysicalConstants k;
  EXPECT_THROW(damping_factor(1.0, {WindowShape::Box, 0.0}, k), ValidationError);
}

TEST(DampingFactor, AlwaysInUnitInterval) {
  Rng rng(17);
  for (int t = 0; t < 2000; ++t) {
    const double x = rng.uniform(-50.0, 50.0);
    for (auto shape : {WindowShape::Box, WindowShape::Gaussian}) {
      const double f = damping_from_phase(x, shape);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

TEST(Progress, HundredCellsAtUnitPhase) {
  const std::vector<double> x(100, 1.0);
  const auto r = progress_from_phases(x, WindowShape::Box);
  double oracle = 1.0;
  for (int n = 0; n < 100; ++n) oracle *= 1.0 / std::sin(1.0);
  EXPECT_NEAR(r.progress, oracle, 0.01 * oracle);
  EXPECT_NEAR(oracle, 3.1e7, 0.05e7);  // two significant figures
  EXPECT_TRUE(r.satisfied);
  EXPECT_FALSE(r.infinite);
}

TEST(Progress, FromLayerModel) {
  // 100 cells, E = O, Lambda = dt = 1, dP0 = hbar: x = O_m - O_n.
  const PhysicalConstants k;
  SensoryLayer layer;
  layer.n_cells = 100;
  layer.dP0 = k.hbar;
  layer.dQ0 = 1.0;
  auto stim = two_level(1.0);
  activate_all(stim, 100);
  const std::vector<SensoryLayer> layers{layer};
  const auto r = decoherence_progress(layers, stim, "on", "off", WindowShape::Box, kDefaultThreshold, k);
  ASSERT_EQ(r.factors.size(), 100u);
  EXPECT_NEAR(r.progress, std::pow(1.0 / std::sin(1.0), 100), 1e-10 * r.progress);

  const auto same = decoherence_progress(layers, stim, "on", "on", WindowShape::Box, kDefaultThreshold, k);
  EXPECT_EQ(same.progress, 1.0);
  EXPECT_FALSE(same.satisfied);
}

TEST(Progress, ZeroOfSineIsInfinite) {
  const std::vector<double> x{kPi};
  const auto r = progress_from_phases(x, WindowShape::Box);
  EXPECT_TRUE(r.infinite);
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(std::isinf(r.progress));
}

TEST(Progress, AtLeastOneAndOneOnlyWithoutSignal) {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(10);
    for (auto& v : x) v = rng.uniform(-3.0, 3.0);
    EXPECT_GT(progress_from_phases(x, WindowShape::Box).progress, 1.0);
    EXPECT_GT(progress_from_phases(x, WindowShape::Gaussian).progress, 1.0);
  }
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(progress_from_phases(zeros, WindowShape::Box).progress, 1.0);
}

TEST(Progress, CountAndMassFormsAgree) {
  const PhysicalConstants k;
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    SensoryLayer layer;
    layer.n_cells = 12;
    layer.lambda_gain = rng.uniform(0.5, 2.0);
    layer.dt_window = rng.uniform(0.5, 2.0);
    layer.dQ0 = rng.uniform(0.5, 2.0);
    layer.cell_volume = rng.uniform(1e-18, 1e-17);
    layer.cation_mass = 6.6e-26;
    Stimulus stim;
    stim.outcomes = {{"a", 0.0, {}}, {"b", 0.0, {}}};
    for (auto& o : stim.outcomes) o.value = rng.uniform(-1.0, 1.0);
    activate_all(stim, layer.n_cells);
    for (std::size_t j = 0; j < layer.n_cells; ++j) stim.energy_maps.push_back(linear_energy(rng.uniform(0.1, 1.0)));
    const double dn0 = *layer.dQ0 * layer.cell_volume / layer.cation_mass;
    const auto forms = criterion_forms(layer, stim, "a", "b", dn0, kDefaultThreshold, k);
    EXPECT_NEAR(forms.ratio, 1.0, 1e-12);
  }
}

TEST(Superselection, WorkedExample) {
  const Complex c(1.0 / std::sqrt(2.0), 0.0);
  const std::vector<Complex> amp{c, c};
  const auto rho = pure_state(amp, outcome_labels(2));
  Eigen::MatrixXd f(2, 2);
  f << 1.0, 0.5, 0.5, 1.0;
  const auto out = apply_superselection(rho, f);
  EXPECT_NEAR(out.entries(0, 1).real(), 0.25, 1e-15);
  EXPECT_NEAR(out.entries(1, 0).real(), 0.25, 1e-15);
  EXPECT_NEAR(out.entries(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(out.entries(1, 1).real(), 0.5, 1e-15);
}

TEST(Superselection, ExtremeFactors) {
  const std::vector<Complex> amp{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  const auto rho = pure_state(amp, outcome_labels(2));
  const auto id = apply_superselection(rho, Eigen::MatrixXd::Ones(2, 2));
  EXPECT_EQ(id.entries, rho.entries);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Identity(2, 2);
  const auto diag = apply_superselection(rho, zero);
  EXPECT_EQ(diag.max_offdiagonal(), 0.0);
  EXPECT_NEAR(diag.entries(0, 0).real(), 0.36, 1e-15);
  EXPECT_NEAR(diag.entries(1, 1).real(), 0.64, 1e-15);
}

TEST(Superselection, RejectsBadFactors) {
  const auto rho = diagonal_state(std::vector<double>{0.5, 0.5}, outcome_labels(2));
  Eigen::MatrixXd f(2, 2);
  f << 1.0, 1.5, 1.5, 1.0;
  EXPECT_THROW(apply_superselection(rho, f), NumericalError);
  f << 1.0, 0.2, 0.3, 1.0;
  EXPECT_THROW(apply_superselection(rho, f), NumericalError);
  EXPECT_THROW(apply_superselection(rho, Eigen::MatrixXd::Ones(1, 1)), ValidationError);
}

TEST(Superselection, PreservesTraceHermiticityPositivity) {
  const PhysicalConstants k;
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXcd a(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    DensityMatrix rho;
    rho.labels = outcome_labels(6);
    rho.entries = a * a.adjoint();
    rho.entries /= rho.entries.trace();

    // Factors from a real transduction model with Gaussian pointers: a
    // product of Gaussian kernels, hence positive semidefinite.
    SensoryLayer layer;
    layer.n_cells = 5;
    layer.dP0 = k.hbar;
    layer.dQ0 = 1.0;
    Stimulus stim;
    for (int n = 0; n < 6; ++n) stim.outcomes.push_back({std::to_string(n), rng.uniform(-1.5, 1.5), {}});
    activate_all(stim, layer.n_cells);
    stim.energy_maps = {linear_energy(1.0)};
    const std::vector<SensoryLayer> layers{layer};
    const auto f = coherence_factors(layers, stim, WindowShape::Gaussian, k);

    const auto out = apply_superselection(rho, f);
    EXPECT_EQ(out.trace(), rho.trace());
    EXPECT_LE(out.hermiticity_error(), 1e-15);
    EXPECT_GE(out.min_eigenvalue(), -1e-12);
  }
}

TEST(Superselection, BlocksWithEqualIndexUntouched) {
  DensityMatrix rho;
  rho.labels = {{0, "a", 0}, {0, "b", 0}, {1, "a", 0}};
  const std::vector<Complex> amp{Complex(0.5, 0), Complex(0.5, 0), Complex(std::sqrt(0.5), 0)};
  rho = pure_state(amp, rho.labels);
  Eigen::MatrixXd f(2, 2);
  f << 1.0, 0.0, 0.0, 1.0;
  const auto out = apply_superselection(rho, f);
  EXPECT_EQ(out.entries(0, 1), rho.entries(0, 1));
  EXPECT_EQ(out.entries(0, 2), Complex(0.0, 0.0));
}

TEST(KineticEnergy, ConstantMomentumField) {
  Grid3 q{4, 4, 4, std::vector<double>(64, 2.0)};
  Grid3 p{4, 4, 4, std::vector<double>(64, 7.0)};
  EXPECT_EQ(kinetic_energy(q, p, 0.1), 0.0);
}

TEST(KineticEnergy, LinearMomentumField) {
  const std::size_t n = 10;
  const double h = 0.1;
  const double g = 3.0;
  const double q0 = 2.5;
  Grid3 q{n, n, n, std::vector<double>(n * n * n, q0)};
  Grid3 p{n, n, n, std::vector<double>(n * n * n)};
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) p.values[(l * n + j) * n + i] = g * (static_cast<double>(i) + 0.5) * h;
  const double volume = std::pow(n * h, 3);
  const double oracle = 0.5 * q0 * g * g * volume;
  EXPECT_NEAR(kinetic_energy(q, p, h), oracle, 0.01 * oracle);

  Grid3 q2 = q;
  for (auto& v : q2.values) v *= 2.0;
  EXPECT_DOUBLE_EQ(kinetic_energy(q2, p, h), 2.0 * kinetic_energy(q, p, h));
}

TEST(KineticEnergy, QuadraticMomentumField) {
  // P = x^2 on [0, 1]^3, Q = 1: (1/2) int 4 x^2 = 2/3.
  const std::size_t n = 40;
  const double h = 1.0 / n;
  Grid3 q{n, n, n, std::vector<double>(n * n * n, 1.0)};
  Grid3 p{n, n, n, std::vector<double>(n * n * n)};
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * h;
        p.values[(l * n + j) * n + i] = x * x;
      }
  EXPECT_NEAR(kinetic_energy(q, p, h), 2.0 / 3.0, 0.01 * 2.0 / 3.0);
}

TEST(KineticEnergy, MismatchedGridsRejected) {
  Grid3 q{2, 2, 2, std::vector<double>(8, 1.0)};
  Grid3 p{2, 2, 1, std::vector<double>(4, 1.0)};
  EXPECT_THROW(kinetic_energy(q, p, 1.0), ValidationError);
  EXPECT_THROW(kinetic_energy(q, q, 0.0), ValidationError);
}

TEST(SensoryLayer, UncertaintyClosure) {
  const PhysicalConstants k;
  SensoryLayer layer;
  layer.dQ0 = 2.0;
  const auto [dq, dp] = pointer_uncertainties(layer, k);
  EXPECT_EQ(dq, 2.0);
  EXPECT_DOUBLE_EQ(dp, k.hbar / 2.0);
  SensoryLayer none;
  EXPECT_THROW(pointer_uncertainties(none, k), ValidationError);
  layer.dP0 = 1e-3 * k.hbar;
  EXPECT_THROW(validate(layer, k), ValidationError);
}
