#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rqed/constants.hpp"
#include "rqed/dicke_phase.hpp"
#include "rqed/errors.hpp"

// Bit coding of a volume partitioned into elementary optical domains of edge
// l_c: a domain holds 1 when its averaged (rho, T) is superradiant, 0 when
// normal. Partial domains at the far faces are discarded.
namespace rqed::lattice {

using Dims = std::array<std::size_t, 3>;

struct LatticeSpec {
  Vector3d extents = Vector3d::Ones();  // m
  double l_c = 1.0;                     // m
  dicke::QuasiParticleSpec spec;
};

/// Boundary condition B(t) sampled at cell centers of a regular grid that
/// spans the full extents, x fastest. `perturbation` is optional (empty =
/// no domain perturbed); a domain counts as perturbed if any of its samples
/// is flagged.
struct BoundaryField {
  Dims samples{1, 1, 1};
  std::vector<double> rho;  // m^-3
  std::vector<double> T;    // K
  std::vector<std::uint8_t> perturbation;
  double t = 0.0;           // s

  std::size_t size() const { return samples[0] * samples[1] * samples[2]; }
};

struct HistoryEntry {
  double t = 0.0;
  std::size_t changed = 0;
};

struct LatticeState {
  Dims dims{0, 0, 0};
  std::vector<std::uint8_t> bits;  // x fastest
  std::vector<HistoryEntry> history;

  std::size_t count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return (iz * dims[1] + iy) * dims[0] + ix;
  }
  std::uint8_t bit(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return bits[index(ix, iy, iz)];
  }
};

// Relative slack so that an extent of exactly n * l_c (up to rounding) gives n domains.
inline constexpr double kEdgeSlack = 1e-9;

struct DomainCount {
  Dims dims{0, 0, 0};
  std::size_t n = 0;
};

inline DomainCount domain_count(const LatticeSpec& spec) {
  if (!(spec.l_c > 0.0)) throw ValidationError("lattice: l_c must be positive");
  DomainCount out;
  out.n = 1;
  for (int a = 0; a < 3; ++a) {
    const double ratio = spec.extents[a] / spec.l_c + kEdgeSlack;
    if (!(ratio >= 1.0)) {
      throw ValidationError("lattice: every extent must be at least l_c");
    }
    out.dims[static_cast<std::size_t>(a)] = static_cast<std::size_t>(std::floor(ratio));
    out.n *= out.dims[static_cast<std::size_t>(a)];
  }
  return out;
}

inline void validate(const BoundaryField& f) {
  const std::size_t n = f.size();
  if (n == 0 || f.rho.size() != n || f.T.size() != n) {
    throw ValidationError("boundary field: rho and T must have one value per sample");
  }
  if (!f.perturbation.empty() && f.perturbation.size() != n) {
    throw ValidationError("boundary field: perturbation flags must have one value per sample");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!(f.rho[s] >= 0.0) || !(f.T[s] >= 0.0)) {
      throw ValidationError("boundary field: samples must be non-negative");
    }
  }
}

/// Per-domain sample means and perturbation flags.
struct DomainAverages {
  Dims dims{0, 0, 0};
  std::vector<double> rho;
  std::vector<double> T;
  std::vector<std::uint8_t> perturbed;
};

inline DomainAverages average_field(const LatticeSpec& spec, const BoundaryField& field) {
  validate(field);
  const auto dc = domain_count(spec);
  DomainAverages avg;
  avg.dims = dc.dims;
  avg.rho.assign(dc.n, 0.0);
  avg.T.assign(dc.n, 0.0);
  avg.perturbed.assign(dc.n, 0);
  std::vector<std::size_t> counts(dc.n, 0);

  auto domain_of = [&](std::size_t axis, std::size_t s, std::size_t& out) {
    const double pos = (static_cast<double>(s) + 0.5) * spec.extents[static_cast<Eigen::Index>(axis)] /
                       static_cast<double>(field.samples[axis]);
    const auto d = static_cast<std::size_t>(std::floor(pos / spec.l_c));
    out = d;
    return d < dc.dims[axis];
  };

  for (std::size_t sz = 0; sz < field.samples[2]; ++sz) {
    std::size_t dz = 0;
    if (!domain_of(2, sz, dz)) continue;
    for (std::size_t sy = 0; sy < field.samples[1]; ++sy) {
      std::size_t dy = 0;
      if (!domain_of(1, sy, dy)) continue;
      for (std::size_t sx = 0; sx < field.samples[0]; ++sx) {
        std::size_t dx = 0;
        if (!domain_of(0, sx, dx)) continue;
        const std::size_t s = (sz * field.samples[1] + sy) * field.samples[0] + sx;
        const std::size_t d = (dz * dc.dims[1] + dy) * dc.dims[0] + dx;
        avg.rho[d] += field.rho[s];
        avg.T[d] += field.T[s];
        if (!field.perturbation.empty() && field.perturbation[s]) avg.perturbed[d] = 1;
        ++counts[d];
      }
    }
  }
  for (std::size_t d = 0; d < dc.n; ++d) {
    if (counts[d] == 0) {
      throw ValidationError("lattice: domain " + std::to_string(d) +
                            " contains no field samples; refine the sampling grid");
    }
    avg.rho[d] /= static_cast<double>(counts[d]);
    avg.T[d] /= static_cast<double>(counts[d]);
  }
  return avg;
}

/// Writes the memory pattern coded by the boundary field.
inline LatticeState code_lattice(const LatticeSpec& spec, const BoundaryField& field,
                                 const PhysicalConstants& k) {
  const auto avg = average_field(spec, field);
  LatticeState st;
  st.dims = avg.dims;
  st.bits.resize(avg.rho.size());
  for (std::size_t d = 0; d < avg.rho.size(); ++d) {
    const auto p = dicke::classify_phase(avg.rho[d], avg.T[d], spec.spec, k);
    st.bits[d] = p.phase == dicke::Phase::Superradiant ? 1 : 0;
  }
  st.history.push_back({field.t, 0});
  return st;
}

struct RewriteOptions {
  // Latched domains keep a 1 through subcritical fields unless perturbed.
  bool latch = false;
};

struct RewriteResult {
  LatticeState state;
  std::size_t flipped = 0;
  std::size_t set = 0;      // 0 -> 1
  std::size_t cleared = 0;  // 1 -> 0
  std::size_t held = 0;     // 1 -> 0 transitions blocked by the latch
};

inline RewriteResult rewrite(const LatticeState& state, const LatticeSpec& spec,
                             const BoundaryField& new_field, const PhysicalConstants& k,
                             RewriteOptions opts = {}) {
  const auto avg = average_field(spec, new_field);
  if (avg.dims != state.dims || state.bits.size() != avg.rho.size()) {
    throw ValidationError("rewrite: lattice dimensions differ from the existing state");
  }
  const LatticeState fresh = code_lattice(spec, new_field, k);
  RewriteResult r;
  r.state = state;
  for (std::size_t d = 0; d < state.bits.size(); ++d) {
    const std::uint8_t old_bit = state.bits[d];
    std::uint8_t new_bit = fresh.bits[d];
    if (opts.latch && old_bit == 1 && new_bit == 0 && !avg.perturbed[d]) {
      new_bit = 1;
      ++r.held;
    }
    if (new_bit != old_bit) {
      ++r.flipped;
      if (new_bit) ++r.set; else ++r.cleared;
    }
    r.state.bits[d] = new_bit;
  }
  r.state.history.push_back({new_field.t, r.flipped});
  return r;
}

struct LatticeStats {
  double ones_fraction = 0.0;
  double zeros_fraction = 0.0;
  std::size_t ones = 0;
  std::size_t n = 0;
};

inline LatticeStats stats(const LatticeState& st) {
  LatticeStats s;
  s.n = st.bits.size();
  for (auto b : st.bits) s.ones += b ? 1 : 0;
  if (s.n > 0) {
    s.ones_fraction = static_cast<double>(s.ones) / static_cast<double>(s.n);
    s.zeros_fraction = static_cast<double>(s.n - s.ones) / static_cast<double>(s.n);
  }
  return s;
}

}  // namespace rqed::lattice
