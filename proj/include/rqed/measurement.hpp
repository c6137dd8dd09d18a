#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rqed/constants.hpp"
#include "rqed/density_matrix.hpp"
#include "rqed/errors.hpp"
#include "rqed/numeric.hpp"
#include "rqed/random.hpp"
#include "rqed/superselection.hpp"

// Selective measurement as explicit density-matrix steps.
//
// Type I (reader outside the measured system):
//   init -> non-selective dephasing -> feedback onto firing pattern -> read
// Type II (reader inseparable from the measured coherence domains):
//   write memories -> non-selective dephasing -> retrieval excitation -> read
//
// Reading samples one basis label with its Born weight. Each reading is
// booked in an energy ledger: k_B T for type I, nothing for type II.
namespace rqed::measurement {

enum class Scheme { TypeI, TypeII };

inline const char* to_string(Scheme s) { return s == Scheme::TypeI ? "I" : "II"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "I" || s == "1") return Scheme::TypeI;
  if (s == "II" || s == "2") return Scheme::TypeII;
  throw ValidationError("unknown measurement scheme '" + s + "', expected I or II");
}

/// Type I: |O_n, A0, {F}>. Type II: |B_n, {M}, D_n, Psi>.
inline std::string label_string(const BasisLabel& l, Scheme s) {
  const std::string n = std::to_string(l.n);
  if (s == Scheme::TypeI) return "O" + n + "|A0|F" + l.pattern;
  return "B" + n + "|M" + l.pattern + "|D" + n + "|Psi" + std::to_string(l.flag);
}

inline std::string binary_pattern(std::size_t value, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t b = 0; b < width; ++b) {
    if ((value >> b) & 1U) s[width - 1 - b] = '1';
  }
  return s;
}

inline std::size_t pattern_width(std::size_t count) {
  std::size_t w = 1;
  while ((std::size_t{1} << w) < count) ++w;
  return w;
}

namespace detail {
inline void check_bits(const std::string& p, const char* what) {
  if (p.empty() || p.find_first_not_of("01") != std::string::npos) {
    throw ValidationError(std::string(what) + " must be a non-empty bit string");
  }
}

inline std::string xor_bits(const std::string& a, const std::string& b) {
  std::string out(a.size(), '0');
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] != b[i]) ? '1' : '0';
  return out;
}

inline std::size_t max_index(const DensityMatrix& rho) {
  std::size_t m = 0;
  for (const auto& l : rho.labels) m = std::max(m, l.n);
  return m;
}
}  // namespace detail

struct InitOptions {
  // Type I: common resting firing pattern {F}_0. Empty means all zeros, wide
  // enough to give every sector its own firing pattern.
  std::string firing_pattern;
  // Type II: memory pattern {M}_n written for each n. Empty means binary(n).
  std::vector<std::string> memory_patterns;
};

/// Pure state sum_n c_n |n, registers> of the chosen scheme.
inline DensityMatrix init_scheme(std::span<const Complex> amplitudes, Scheme scheme,
                                 const InitOptions& opts = {}) {
  if (amplitudes.empty()) throw ValidationError("init_scheme: no amplitudes");
  double norm = 0.0;
  for (const auto& c : amplitudes) norm += std::norm(c);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw ValidationError("init_scheme: amplitudes are not normalized (sum |c|^2 = " +
                          std::to_string(norm) + ")");
  }
  const std::size_t n = amplitudes.size();
  std::vector<BasisLabel> labels(n);
  if (scheme == Scheme::TypeI) {
    const std::string ready = opts.firing_pattern.empty()
                                  ? std::string(pattern_width(n + 1), '0')
                                  : opts.firing_pattern;
    detail::check_bits(ready, "firing pattern");
    for (std::size_t a = 0; a < n; ++a) labels[a] = {a, ready, 0};
  } else {
    std::vector<std::string> memories = opts.memory_patterns;
    if (memories.empty()) {
      for (std::size_t a = 0; a < n; ++a) memories.push_back(binary_pattern(a, pattern_width(n)));
    }
    if (memories.size() != n) {
      throw ValidationError("init_scheme: need one memory pattern per amplitude");
    }
    std::set<std::string> distinct;
    for (std::size_t a = 0; a < n; ++a) {
      detail::check_bits(memories[a], "memory pattern");
      distinct.insert(memories[a]);
      labels[a] = {a, memories[a], 0};
    }
    if (distinct.size() != n) {
      throw ValidationError("init_scheme: memory patterns of distinct boundary conditions must differ");
    }
  }
  return pure_state(amplitudes, std::move(labels));
}

/// Dephasing between sectors of different n. Without factors the
/// off-diagonal blocks are removed entirely (ideal non-selective
/// measurement); with factors from the superselection model they are
/// multiplied by F(n_a, n_b).
inline DensityMatrix nonselective_step(const DensityMatrix& rho,
                                       const std::optional<Eigen::MatrixXd>& factors = std::nullopt) {
  if (factors) return decoherence::apply_superselection(rho, *factors);
  const auto size = static_cast<Eigen::Index>(detail::max_index(rho) + 1);
  return decoherence::apply_superselection(rho, Eigen::MatrixXd::Identity(size, size));
}

/// Conditional relabeling of the pattern register by sector n.
struct FeedbackMap {
  Scheme scheme = Scheme::TypeI;
  // Type I: the resting pattern {F}_0 and the target {F}_n per sector.
  std::string ready_pattern;
  std::vector<std::string> firing_patterns;
  // Type II: excitation flag Psi_n per sector, pairwise distinct.
  std::vector<std::uint32_t> excitation_flags;

  static FeedbackMap firing(std::string ready, std::vector<std::string> targets) {
    return {Scheme::TypeI, std::move(ready), std::move(targets), {}};
  }
  static FeedbackMap retrieval(std::vector<std::uint32_t> flags) {
    return {Scheme::TypeII, {}, {}, std::move(flags)};
  }
};

/// Default maps: type I fires binary(n + 1) on the resting pattern's width,
/// type II excites Psi_n = n + 1.
inline FeedbackMap default_feedback(Scheme scheme, std::size_t sectors, const std::string& ready) {
  if (scheme == Scheme::TypeI) {
    const std::size_t width = ready.size();
    if (width < pattern_width(sectors + 1)) {
      throw ValidationError("default_feedback: resting pattern is too short for " +
                            std::to_string(sectors) + " sectors");
    }
    std::vector<std::string> targets;
    for (std::size_t n = 0; n < sectors; ++n) targets.push_back(binary_pattern(n + 1, width));
    return FeedbackMap::firing(ready, std::move(targets));
  }
  std::vector<std::uint32_t> flags;
  for (std::size_t n = 0; n < sectors; ++n) flags.push_back(static_cast<std::uint32_t>(n + 1));
  return FeedbackMap::retrieval(std::move(flags));
}

/// Entangling feedback: a controlled XOR on the pattern register taking
/// {F}_0 to {F}_n in sector n (type I) or |0; M_n> to |Psi_n; M_n> (type II).
/// It permutes basis labels, so trace and spectrum are unchanged.
inline DensityMatrix feedback_step(const DensityMatrix& rho, const FeedbackMap& map) {
  validate(rho);
  const std::size_t sectors = detail::max_index(rho) + 1;
  for (std::size_t a = 0; a < rho.dim(); ++a) {
    for (std::size_t b = 0; b < rho.dim(); ++b) {
      if (rho.labels[a].n != rho.labels[b].n &&
          std::abs(rho.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) > kPositivityTolerance) {
        throw ValidationError("feedback_step: state is not block-diagonal in n; run the non-selective step first");
      }
    }
  }
  std::set<std::size_t> occupied;
  for (const auto& l : rho.labels) occupied.insert(l.n);

  DensityMatrix out = rho;
  if (map.scheme == Scheme::TypeI) {
    if (map.firing_patterns.size() < sectors) {
      throw ValidationError("feedback_step: no target firing pattern for some sector");
    }
    detail::check_bits(map.ready_pattern, "resting pattern");
    std::set<std::string> used;
    for (std::size_t n : occupied) {
      const auto& t = map.firing_patterns[n];
      detail::check_bits(t, "target firing pattern");
      if (t.size() != map.ready_pattern.size()) {
        throw ValidationError("feedback_step: target pattern width differs from the resting pattern");
      }
      if (!used.insert(t).second) {
        throw ValidationError("feedback_step: mapping is not injective, sectors would merge");
      }
    }
    for (auto& l : out.labels) {
      if (l.pattern.size() != map.ready_pattern.size()) {
        throw ValidationError("feedback_step: label pattern width differs from the resting pattern");
      }
      l.pattern = detail::xor_bits(l.pattern,
                                   detail::xor_bits(map.ready_pattern, map.firing_patterns[l.n]));
    }
  } else {
    if (map.excitation_flags.size() < sectors) {
      throw ValidationError("feedback_step: no excitation flag for some sector");
    }
    std::set<std::uint32_t> used;
    for (std::size_t n : occupied) {
      if (!used.insert(map.excitation_flags[n]).second) {
        throw ValidationError("feedback_step: excitation flags must be pairwise distinct");
      }
    }
    for (auto& l : out.labels) l.flag ^= map.excitation_flags[l.n];
  }
  return out;
}

struct LedgerEntry {
  std::uint64_t event_id = 0;
  double cost = 0.0;  // J
};

/// Energy booked for event readings.
struct EnergyLedger {
  double temperature = 310.0;  // K
  std::vector<LedgerEntry> entries;

  double total() const {
    std::vector<double> costs;
    costs.reserve(entries.size());
    for (const auto& e : entries) costs.push_back(e.cost);
    return exact_sum(costs);
  }
};

/// Cost of one reading: k_B T for type I, zero for type II.
inline double reading_cost(Scheme scheme, double temperature, const PhysicalConstants& k) {
  return scheme == Scheme::TypeI ? k.k_B * temperature : 0.0;
}

struct MeasurementOutcome {
  std::size_t index = 0;        // n0, the superposition index read
  std::size_t basis_index = 0;  // position of the sampled label
  BasisLabel label;
  double probability = 0.0;
  DensityMatrix collapsed;
};

inline constexpr double kReadingDiagonalTolerance = 1e-10;

namespace detail {
inline std::size_t sample_index(std::span<const double> weights, double u) {
  double total = 0.0;
  for (double w : weights) total += std::max(0.0, w);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t a = 0; a < weights.size(); ++a) {
    const double w = std::max(0.0, weights[a]);
    if (w == 0.0) continue;
    last = a;
    acc += w / total;
    if (u < acc) return a;
  }
  return last;
}

inline void require_diagonal(const DensityMatrix& rho) {
  validate(rho);
  if (rho.max_offdiagonal() > kReadingDiagonalTolerance) {
    throw ValidationError("event reading requires a state diagonal in the reading basis; "
                          "coherences remain (reading before decoherence is undefined)");
  }
}
}  // namespace detail

/// Born-rule reading with energy bookkeeping.
inline MeasurementOutcome event_read(const DensityMatrix& rho, Scheme scheme, Rng& rng,
                                     EnergyLedger& ledger, const PhysicalConstants& k = {}) {
  detail::require_diagonal(rho);
  const auto w = rho.diagonal_weights();
  const std::size_t a = detail::sample_index(w, rng.uniform());

  MeasurementOutcome out;
  out.basis_index = a;
  out.label = rho.labels[a];
  out.index = rho.labels[a].n;
  out.probability = w[a];
  out.collapsed.labels = rho.labels;
  const auto d = static_cast<Eigen::Index>(rho.dim());
  out.collapsed.entries = Eigen::MatrixXcd::Zero(d, d);
  out.collapsed.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;

  ledger.entries.push_back({static_cast<std::uint64_t>(ledger.entries.size()),
                            reading_cost(scheme, ledger.temperature, k)});
  return out;
}

inline MeasurementOutcome event_read(const DensityMatrix& rho, Scheme scheme, std::uint64_t seed,
                                     EnergyLedger& ledger, const PhysicalConstants& k = {}) {
  Rng rng(seed);
  return event_read(rho, scheme, rng, ledger, k);
}

/// Counts per basis label over n_samples Born draws.
inline std::vector<std::uint64_t> born_stats(const DensityMatrix& rho, std::uint64_t n_samples,
                                             std::uint64_t seed) {
  detail::require_diagonal(rho);
  const auto w = rho.diagonal_weights();
  std::vector<std::uint64_t> hist(rho.dim(), 0);
  Rng rng(seed);
  for (std::uint64_t s = 0; s < n_samples; ++s) ++hist[detail::sample_index(w, rng.uniform())];
  return hist;
}

/// n_readings successive event readings of the same prepared state; one
/// ledger entry per reading. Returns counts per basis label.
inline std::vector<std::uint64_t> read_many(const DensityMatrix& rho, Scheme scheme,
                                            std::uint64_t n_readings, Rng& rng, EnergyLedger& ledger,
                                            const PhysicalConstants& k = {}) {
  detail::require_diagonal(rho);
  const auto w = rho.diagonal_weights();
  const double cost = reading_cost(scheme, ledger.temperature, k);
  std::vector<std::uint64_t> hist(rho.dim(), 0);
  ledger.entries.reserve(ledger.entries.size() + n_readings);
  for (std::uint64_t s = 0; s < n_readings; ++s) {
    ++hist[detail::sample_index(w, rng.uniform())];
    ledger.entries.push_back({static_cast<std::uint64_t>(ledger.entries.size()), cost});
  }
  return hist;
}

/// Every intermediate state of one pipeline pass.
struct PipelineRun {
  DensityMatrix initial;
  DensityMatrix dephased;
  DensityMatrix correlated;
  MeasurementOutcome outcome;
};

inline PipelineRun run_pipeline(std::span<const Complex> amplitudes, Scheme scheme, Rng& rng,
                                EnergyLedger& ledger, const InitOptions& init = {},
                                const std::optional<Eigen::MatrixXd>& factors = std::nullopt,
                                const std::optional<FeedbackMap>& feedback = std::nullopt,
                                const PhysicalConstants& k = {}) {
  PipelineRun run;
  run.initial = init_scheme(amplitudes, scheme, init);
  run.dephased = nonselective_step(run.initial, factors);
  const FeedbackMap map = feedback ? *feedback
                                   : default_feedback(scheme, amplitudes.size(),
                                                      run.initial.labels.front().pattern);
  run.correlated = feedback_step(run.dephased, map);
  run.outcome = event_read(run.correlated, scheme, rng, ledger, k);
  return run;
}

}  // namespace rqed::measurement
