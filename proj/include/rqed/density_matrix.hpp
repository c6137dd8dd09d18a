#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rqed/constants.hpp"
#include "rqed/errors.hpp"

namespace rqed {

/// One composite basis vector. `n` is the superposition index (stimulus
/// eigenvalue or boundary condition); `pattern` is a classical bit string
/// register (firing pattern or memory pattern); `flag` is the excitation
/// register of the type-II scheme (0 = ground).
struct BasisLabel {
  std::size_t n = 0;
  std::string pattern;
  std::uint32_t flag = 0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
  friend bool operator<(const BasisLabel& a, const BasisLabel& b) {
    return std::tie(a.n, a.pattern, a.flag) < std::tie(b.n, b.pattern, b.flag);
  }
};

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

/// Labeled density matrix; entries(a, b) = <label_a| rho |label_b>.
struct DensityMatrix {
  std::vector<BasisLabel> labels;
  Eigen::MatrixXcd entries;

  std::size_t dim() const { return labels.size(); }

  Complex trace() const { return entries.trace(); }

  double hermiticity_error() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    const Eigen::MatrixXcd h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  Eigen::VectorXd eigenvalues() const {
    const Eigen::MatrixXcd h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double purity() const { return (entries * entries).trace().real(); }

  /// Largest |rho_ab| with a != b.
  double max_offdiagonal() const {
    double m = 0.0;
    for (Eigen::Index a = 0; a < entries.rows(); ++a)
      for (Eigen::Index b = 0; b < entries.cols(); ++b)
        if (a != b) m = std::max(m, std::abs(entries(a, b)));
    return m;
  }

  std::vector<double> diagonal_weights() const {
    std::vector<double> w(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      w[a] = entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)).real();
    }
    return w;
  }
};

/// Hermitian, unit trace, positive, distinct labels.
inline void validate(const DensityMatrix& rho) {
  const auto d = static_cast<Eigen::Index>(rho.dim());
  if (d == 0 || rho.entries.rows() != d || rho.entries.cols() != d) {
    throw ValidationError("density matrix: entries must be a non-empty square matrix matching the labels");
  }
  std::set<BasisLabel> seen(rho.labels.begin(), rho.labels.end());
  if (seen.size() != rho.labels.size()) {
    throw ValidationError("density matrix: basis labels must be distinct");
  }
  if (!rho.entries.allFinite()) throw ValidationError("density matrix: non-finite entries");
  if (rho.hermiticity_error() > kHermitianTolerance) {
    throw ValidationError("density matrix: not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > kTraceTolerance) {
    throw ValidationError("density matrix: trace differs from 1");
  }
  if (rho.min_eigenvalue() < -kPositivityTolerance) {
    throw ValidationError("density matrix: negative eigenvalue");
  }
}

/// |psi><psi| for psi = sum_a c_a |label_a>.
inline DensityMatrix pure_state(std::span<const Complex> amplitudes, std::vector<BasisLabel> labels) {
  if (amplitudes.size() != labels.size()) {
    throw ValidationError("pure_state: one amplitude per label required");
  }
  const auto d = static_cast<Eigen::Index>(amplitudes.size());
  Eigen::VectorXcd psi(d);
  for (Eigen::Index a = 0; a < d; ++a) psi[a] = amplitudes[static_cast<std::size_t>(a)];
  DensityMatrix rho;
  rho.labels = std::move(labels);
  rho.entries = psi * psi.adjoint();
  return rho;
}

inline DensityMatrix diagonal_state(std::span<const double> weights, std::vector<BasisLabel> labels) {
  if (weights.size() != labels.size()) {
    throw ValidationError("diagonal_state: one weight per label required");
  }
  const auto d = static_cast<Eigen::Index>(weights.size());
  DensityMatrix rho;
  rho.labels = std::move(labels);
  rho.entries = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) rho.entries(a, a) = weights[static_cast<std::size_t>(a)];
  return rho;
}

/// Labels 0..n-1 with empty registers (bare outcome basis).
inline std::vector<BasisLabel> outcome_labels(std::size_t n) {
  std::vector<BasisLabel> labels(n);
  for (std::size_t a = 0; a < n; ++a) labels[a].n = a;
  return labels;
}

}  // namespace rqed
