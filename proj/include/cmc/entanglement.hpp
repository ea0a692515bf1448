#ifndef CMC_ENTANGLEMENT_HPP
#define CMC_ENTANGLEMENT_HPP

// Two-cavity entanglement: partial trace, partial transpose, logarithmic
// negativity, and the detuning chevron of the two-photon process.

#include <cmc/dynamics.hpp>

#include <vector>

namespace cmc {

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Mode>& keep);
// Transpose of the `subsystem` factor only.
DensityMatrix partial_transpose(const DensityMatrix& rho, Mode subsystem);
// log2 || rho^{T_subsystem} ||_1
double log_negativity(const DensityMatrix& rho, Mode subsystem);

struct RabiProfile {
  double rabi_frequency = 0;  // sqrt(g_eff^2 + (delta/2)^2)
  double amplitude = 0;       // g_eff^2 / (g_eff^2 + (delta/2)^2)
};
RabiProfile detuned_rabi_profile(double delta, double g_eff);

// Second-order coupling of |0,2,0> to (|2,0,0> + |0,0,2>)/sqrt2.
double two_photon_coupling(const SystemParams& p);

struct ChevronOptions {
  ModeDims dims{7, 4, 7};
  unsigned workers = 1;
  DynamicsOptions dynamics;
};

struct DetuningScan {
  std::vector<double> delta_values;
  TimeGrid grid;
  // log_negativity[d][i]: detuning d, time point i (bits).
  std::vector<std::vector<double>> log_negativity;
  // <X_b^- X_b^+>(t) per detuning.
  std::vector<std::vector<double>> mirror_occupation;
  // max_t P_cav / (P_cav + P_b), with P_cav the population of |2,0,0>, |0,0,2>
  // and P_b that of |0,2,0>. Both decay at the same rate, so the ratio is the
  // coherent transfer probability.
  std::vector<double> transfer_amplitude;
};

// For each delta: omega_b -> base.omega_b + delta with the cavities left at
// base.omega_a = base.omega_c, master equation from |0,2,0>, mirror traced
// out, negativity with respect to cavity a.
DetuningScan chevron_scan(const SystemParams& base, const std::vector<double>& delta_values, const TimeGrid& grid,
                          const ChevronOptions& opts = {});

// delta values n_points evenly spaced over [-span, span].
std::vector<double> symmetric_deltas(double span, std::size_t n_points);

}  // namespace cmc

#endif
