#ifndef CMC_DYNAMICS_HPP
#define CMC_DYNAMICS_HPP

// Lindblad master equation and Monte-Carlo wave-function trajectories with
// dressed jump operators X_o^+ at rates gamma_o.
//
// Both solvers run in the energy eigenbasis, in the interaction picture of
// the full Hamiltonian, so the integrator only sees the dissipative part.

#include <cmc/dressed.hpp>
#include <cmc/model.hpp>
#include <cmc/ode.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace cmc {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  std::size_t n_points = 2;

  TimeGrid() = default;
  TimeGrid(double start, double end, std::size_t points);

  double at(std::size_t i) const;
  std::vector<double> times() const;
};

using ModeSeries = std::array<std::vector<double>, 3>;

struct JumpRecord {
  double time = 0;  // upper end of the bisection bracket
  Mode channel = Mode::A;
  double bracket_lo = 0;
  double norm2_lo = 0;  // squared norm at bracket_lo, >= threshold
  double norm2_hi = 0;  // squared norm at time, <= threshold
  double threshold = 0;
};

struct TrajectoryResult {
  TimeGrid grid;
  ModeSeries occupations;
  std::vector<JumpRecord> jumps;
  std::uint64_t seed = 0;
  // Largest increase of the squared norm seen across one accepted step.
  double max_norm_increase = 0;
};

struct EnsembleResult {
  TimeGrid grid;
  ModeSeries occupations;
  std::size_t n_traj = 0;
  std::uint64_t base_seed = 0;
};

struct MasterResult {
  TimeGrid grid;
  ModeSeries occupations;
  std::vector<double> trace;
  std::vector<double> min_eigenvalue;
  DensityMatrix final_state;
  std::size_t steps = 0;
};

struct DynamicsOptions {
  OdeOptions ode;
  double jump_time_tol = 1e-6;
  // Norm-squared increase per step tolerated before the run is aborted.
  double norm_increase_tol = 1e-7;
};

// Dressed basis, jump operators and their symmetry-sector blocks for one
// parameter set. Immutable after construction and safe to share between threads.
class OpenSystem {
 public:
  OpenSystem(const SystemParams& params, const ModeDims& dims);

  const SystemParams& params() const { return params_; }
  const ModeDims& dims() const { return dims_; }
  const Operator& hamiltonian() const { return hamiltonian_; }
  const DressedBasis& basis() const { return basis_; }
  const DressedOperatorSet& operators() const { return ops_; }

  // Sector layout in the eigenbasis.
  int sector_count() const { return static_cast<int>(members_.size()); }
  const std::vector<Eigen::Index>& members(int s) const { return members_[static_cast<std::size_t>(s)]; }
  const RealVector& energies(int s) const { return energies_[static_cast<std::size_t>(s)]; }
  Eigen::Index offset(int s) const { return offsets_[static_cast<std::size_t>(s)]; }
  // Sector reached from s by X_o^+, or -1 when that block vanishes.
  int target(Mode o, int s) const { return target_[idx(o)][static_cast<std::size_t>(s)]; }
  // X_o^+ block from sector s to target(o, s).
  const Matrix& jump(Mode o, int s) const { return jump_[idx(o)][static_cast<std::size_t>(s)]; }
  // X_o^- X_o^+ block inside sector s.
  const Matrix& number(Mode o, int s) const { return number_[idx(o)][static_cast<std::size_t>(s)]; }
  // sum_o gamma_o X_o^- X_o^+ inside sector s.
  const Matrix& decay(int s) const { return decay_[static_cast<std::size_t>(s)]; }

  // Bare-basis ket -> eigenbasis amplitudes packed sector by sector, and back.
  Vector to_packed(const Vector& bare) const;
  Vector from_packed(const Vector& packed) const;

 private:
  static std::size_t idx(Mode o) { return static_cast<std::size_t>(o); }

  SystemParams params_;
  ModeDims dims_;
  Operator hamiltonian_;
  DressedBasis basis_;
  DressedOperatorSet ops_;
  std::vector<std::vector<Eigen::Index>> members_;
  std::vector<RealVector> energies_;
  std::vector<Eigen::Index> offsets_;
  std::array<std::vector<int>, 3> target_;
  std::array<std::vector<Matrix>, 3> jump_;
  std::array<std::vector<Matrix>, 3> number_;
  std::vector<Matrix> decay_;
};

// -i[H, rho] + sum_o gamma_o (X rho X^+ - 1/2 {X^+ X, rho}), X = jump_ops[o].
Matrix lindblad_rhs(const DensityMatrix& rho, const Operator& h, const std::vector<Operator>& jump_ops,
                    const std::vector<double>& rates);

using MasterObserver = std::function<void(std::size_t index, double t, const DensityMatrix& rho)>;

MasterResult evolve_master(const DensityMatrix& rho0, const OpenSystem& system, const TimeGrid& grid,
                           const DynamicsOptions& opts = {}, const MasterObserver& observer = {});
MasterResult evolve_master(const DensityMatrix& rho0, const SystemParams& params, const ModeDims& dims,
                           const TimeGrid& grid, const DynamicsOptions& opts = {});

TrajectoryResult evolve_trajectory(const StateVector& psi0, const OpenSystem& system, const TimeGrid& grid,
                                   std::uint64_t seed, const DynamicsOptions& opts = {});
TrajectoryResult evolve_trajectory(const StateVector& psi0, const SystemParams& params, const ModeDims& dims,
                                   const TimeGrid& grid, std::uint64_t seed, const DynamicsOptions& opts = {});

// Seed of trajectory `index` in an ensemble: splitmix64 finaliser of
// base_seed + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t index);

// Runs trajectories 0..n_traj-1 on `workers` threads (0 = hardware
// concurrency). Results are stored by index, so any worker count gives the
// same output.
std::vector<TrajectoryResult> run_trajectories(const StateVector& psi0, const OpenSystem& system,
                                               const TimeGrid& grid, std::size_t n_traj, std::uint64_t base_seed,
                                               unsigned workers = 0, const DynamicsOptions& opts = {});

// Mean of the first n entries of `runs`, summed in index order.
EnsembleResult ensemble_mean(const std::vector<TrajectoryResult>& runs, std::size_t n, std::uint64_t base_seed);

EnsembleResult average_trajectories(const StateVector& psi0, const OpenSystem& system, const TimeGrid& grid,
                                    std::size_t n_traj, std::uint64_t base_seed, unsigned workers = 0,
                                    const DynamicsOptions& opts = {});

// Closed-system occupations via the spectral propagator exp(-iHt).
ModeSeries unitary_occupations(const StateVector& psi0, const OpenSystem& system, const TimeGrid& grid);

// max over modes and grid points of |a - b|.
double max_abs_deviation(const ModeSeries& a, const ModeSeries& b);

}  // namespace cmc

#endif
