#ifndef CMC_MODEL_HPP
#define CMC_MODEL_HPP

// Cavity-mirror-cavity Hamiltonian and its perturbative (Schrieffer-Wolff)
// reductions. Every energy is in units of the mirror frequency omega_b.

#include <cmc/fock.hpp>

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmc {

struct SystemParams {
  double omega_a = 1.0;
  double omega_b = 1.0;
  double omega_c = 1.0;
  double g = 0.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double gamma_c = 0.0;

  // Omega = omega_c / omega_a, tied to the mirror position.
  double ratio() const { return omega_c / omega_a; }
  double gamma(Mode m) const;
  void validate() const;
};

enum class ScenarioKind { TwoPhoton, FourPhoton, Janus };

std::string_view scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(std::string_view name);
// Human-readable resonance condition, e.g. "omega_b ~ 4 omega".
std::string_view resonance_condition(ScenarioKind kind);

// Coefficients of the Janus effective Hamiltonian
//   Omega_a a^+a + Omega_b b^+b + Omega_c c^+c + alpha_a a^+2 a^2 + alpha_c c^+2 c^2
//   + alpha_ab a^+a b^+b + alpha_ac a^+a c^+c + alpha_bc b^+b c^+c
//   + g_eff (a^+2 c^+2 b + a^2 c^2 b^+)
struct JanusCoefficients {
  double Omega_a = 0, Omega_b = 0, Omega_c = 0;
  double alpha_a = 0, alpha_c = 0;
  double alpha_ab = 0, alpha_ac = 0, alpha_bc = 0;
  double g_eff = 0;
};

Operator bare_hamiltonian(const SystemParams& p, const ModeDims& dims);
// -(g/2) [ (a + a^+)^2 - Omega^2 (c + c^+)^2 ] (b + b^+)
Operator interaction_hamiltonian(const SystemParams& p, const ModeDims& dims);
Operator build_full_hamiltonian(const SystemParams& p, const ModeDims& dims);

// Closed-form anti-Hermitian generator with [S, H0] = -H_I.
// Throws SingularGenerator when a denominator falls below kSingularGuard.
inline constexpr double kSingularGuard = 1e-6;
Operator build_sw_generator(const SystemParams& p, const ModeDims& dims);

// H0 + (1/2)[S, H_I]            (order 2)
// H0 + (1/2)[S, H_I] + (1/3)[S, [S, H_I]]   (order 3)
// When `expansion` is given, S is built at those frequencies while H0 keeps
// the frequencies of `p`; H_I depends only on g and Omega, which the
// expansion point must share with `p`.
Operator effective_hamiltonian_numeric(const SystemParams& p, const ModeDims& dims, int order,
                                       const std::optional<SystemParams>& expansion = std::nullopt);

// The frequencies at which the closed-form coefficients of each scenario are
// evaluated: omega_a = omega_c = omega_b (two-photon), omega_a = omega_c =
// omega_b / 4 (four-photon), omega_b = 2 (omega_a + omega_c) at fixed Omega
// (Janus). Couplings and rates are copied from `p`.
SystemParams resonant_expansion_point(ScenarioKind kind, const SystemParams& p);

// Basis {|0,2,0>, |psi+>, |psi->}, psi+- = (|2,0,0> +- |0,0,2>)/sqrt2.
Eigen::Matrix3d two_photon_block(const SystemParams& p);
// Basis {|0,1,0>, |psi-(4)>, |psi+(4)>, |2,0,2>}, psi+-(4) = (|4,0,0> +- |0,0,4>)/sqrt2.
// Diagonal energies carry no vacuum-shift constant.
Eigen::Matrix4d four_photon_block(const SystemParams& p);
// Basis {|0,1,0>, |2,0,2>}. The returned block includes the bare energies:
//   [[omega_b + Omega_b,  2 g_eff],
//    [2 g_eff,            2 omega_a + 2 omega_c + 2 (Omega_a + Omega_c + alpha_a + alpha_c + 2 alpha_ac)]]
Eigen::Matrix2d janus_block(const SystemParams& p);

JanusCoefficients janus_coefficients(const SystemParams& p);
// Same coefficients read off the numeric order-3 SW Hamiltonian at the Janus
// expansion point of `p`; shifts are measured from the vacuum shift.
JanusCoefficients janus_coefficients_numeric(const SystemParams& p, const ModeDims& dims);

// Columns are the bare-basis kets of the scenario's ordered block basis.
Matrix scenario_basis(ScenarioKind kind, const ModeDims& dims);
// Initial bare Fock state of each scenario preset.
Occupation scenario_initial_state(ScenarioKind kind);
// Default truncation: [7, 4, 7] for two-photon, [7, 3, 7] otherwise.
ModeDims default_dims(ScenarioKind kind);

// B^+ H B, real part. Throws if the imaginary part exceeds 1e-12.
RealMatrix project(const Operator& h, const Matrix& basis);

// Per-mode margin masks for identities that only hold away from the
// truncation edge: a state is interior when n_o <= dim_o - 1 - margin[o].
std::vector<std::size_t> interior_indices(const ModeDims& dims, const std::array<int, 3>& margin);
double max_abs_on(const Matrix& m, const std::vector<std::size_t>& indices);

// max |[S,H0] + H_I| on the interior (margins: 2 levels in a and c, 1 in b).
double sw_condition_residual(const SystemParams& p, const ModeDims& dims);

struct SwVerificationRow {
  std::string scenario;
  std::string quantity;
  double closed_form = 0;
  double numeric = 0;
  double deviation = 0;
  // Gated rows must satisfy deviation < tolerance; informational rows are
  // reported only.
  bool gated = true;
  double tolerance = 1e-9;

  bool passed() const { return !gated || deviation < tolerance; }
};

// Full comparison of closed-form blocks and coefficients against the numeric
// SW reduction for one scenario.
std::vector<SwVerificationRow> verify_sw(ScenarioKind kind, const SystemParams& p, const ModeDims& dims);

}  // namespace cmc

#endif
