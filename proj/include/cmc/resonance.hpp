#ifndef CMC_RESONANCE_HPP
#define CMC_RESONANCE_HPP

// Analytic resonance points and their numerical refinement on the full
// Hamiltonian. The tuned frequency is omega_a = omega_c for the two- and
// four-photon processes and omega_c (at fixed omega_a) for the Janus process.

#include <cmc/model.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace cmc {

enum class ResonanceObjective {
  Gap,        // splitting of the two dressed levels carrying the resonant pair
  Amplitude,  // 1 - max closed-system transfer probability
};

std::string_view objective_name(ResonanceObjective kind);
ResonanceObjective objective_from_name(std::string_view name);

// Parameters with the tuned frequency set to `value`.
SystemParams with_resonant_frequency(ScenarioKind kind, const SystemParams& p, double value);
double resonant_frequency(ScenarioKind kind, const SystemParams& p);

// Two-photon: omega_b + g^2/omega_b. Four-photon: omega_b/4 + 7 g^2/omega_b.
// Janus: omega_c solving the equal-diagonal condition of the closed-form
// two-level block at the given omega_a. Throws NoResonance when no root exists.
double analytic_resonance(ScenarioKind kind, const SystemParams& p);

// Initial ket and resonant partner of each process, bare basis.
std::pair<Vector, Vector> resonant_pair_kets(ScenarioKind kind, const ModeDims& dims);

struct ResonantLevels {
  double energy_lo = 0, energy_hi = 0;
  // |<initial|k>|^2 and |<target|k>|^2 for the two identified eigenstates.
  double lo_initial = 0, lo_target = 0, hi_initial = 0, hi_target = 0;
  bool ambiguous = false;

  double gap() const { return energy_hi - energy_lo; }
};

// The two eigenstates with the largest weight on the resonant pair.
ResonantLevels resonant_levels(ScenarioKind kind, const SystemParams& p, const ModeDims& dims);

// Closed-system transfer probability |<target| e^{-iHt} |initial>|^2 at
// t = pi / gap (half the effective Rabi period).
double half_period_transfer(ScenarioKind kind, const SystemParams& p, const ModeDims& dims);

struct ResonanceResult {
  ScenarioKind scenario = ScenarioKind::TwoPhoton;
  ResonanceObjective objective = ResonanceObjective::Gap;
  double analytic_value = 0;
  double optimized_value = 0;
  double analytic_objective = 0;
  double optimized_objective = 0;
  double search_width = 0;
  double tolerance = 0;
  std::vector<std::pair<double, double>> objective_trace;  // (candidate, objective)

  double difference() const { return optimized_value - analytic_value; }
};

struct TunerOptions {
  ResonanceObjective objective = ResonanceObjective::Gap;
  std::optional<double> search_width;  // default 40 g^3 / omega_b^2
  double tolerance = 1e-8;
  std::optional<ModeDims> dims;  // default_dims(kind) when unset
};

double default_search_width(const SystemParams& p);

// Golden-section search on [analytic - w/2, analytic + w/2]. Throws
// NonUnimodal when the bracket holds several minima or the minimum sits on
// the bracket edge.
ResonanceResult optimize_resonance(ScenarioKind kind, const SystemParams& p, const TunerOptions& opts = {});

}  // namespace cmc

#endif
