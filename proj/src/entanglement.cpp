#include <cmc/entanglement.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace cmc {

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<Mode>& keep) {
  if (keep.empty()) fail(ErrorCode::InvalidArgument, "partial trace needs at least one kept mode");
  const ModeDims& dims = rho.dims();
  std::vector<int> sizes;
  std::vector<Mode> modes;
  std::vector<bool> kept(dims.mode_count(), false);
  for (std::size_t slot = 0; slot < dims.mode_count(); ++slot)
    if (std::find(keep.begin(), keep.end(), dims.mode(slot)) != keep.end()) {
      kept[slot] = true;
      sizes.push_back(dims.size(slot));
      modes.push_back(dims.mode(slot));
    }
  for (Mode m : keep)
    if (dims.slot_of(m) < 0) fail(ErrorCode::InvalidArgument, std::string("mode ") + mode_name(m) + " not present");
  const ModeDims out_dims(sizes, modes);

  const std::size_t n = dims.total();
  std::vector<Eigen::Index> kept_index(n);
  std::vector<std::size_t> traced_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Occupation occ = dims.unflatten(i);
    std::size_t k = 0, r = 0;
    for (std::size_t slot = 0; slot < occ.size(); ++slot) {
      const auto d = static_cast<std::size_t>(dims.size(slot));
      const auto v = static_cast<std::size_t>(occ[slot]);
      if (kept[slot])
        k = k * d + v;
      else
        r = r * d + v;
    }
    kept_index[i] = static_cast<Eigen::Index>(k);
    traced_index[i] = r;
  }

  const auto m = static_cast<Eigen::Index>(out_dims.total());
  Matrix out = Matrix::Zero(m, m);
  const Matrix& rm = rho.matrix();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (traced_index[i] == traced_index[j])
        out(kept_index[i], kept_index[j]) += rm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return DensityMatrix(std::move(out), out_dims);
}

DensityMatrix partial_transpose(const DensityMatrix& rho, Mode subsystem) {
  const ModeDims& dims = rho.dims();
  const int slot = dims.slot_of(subsystem);
  if (slot < 0)
    fail(ErrorCode::InvalidArgument, std::string("mode ") + mode_name(subsystem) + " not present for partial transpose");
  const std::size_t n = dims.total();
  std::size_t stride = 1;
  for (std::size_t s = static_cast<std::size_t>(slot) + 1; s < dims.mode_count(); ++s)
    stride *= static_cast<std::size_t>(dims.size(s));
  const auto d = static_cast<std::size_t>(dims.size(static_cast<std::size_t>(slot)));

  const Matrix& rm = rho.matrix();
  Matrix out(rm.rows(), rm.cols());
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jd = (j / stride) % d;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t id = (i / stride) % d;
      // swap the subsystem digits of row and column
      const std::size_t i2 = i - id * stride + jd * stride;
      const std::size_t j2 = j - jd * stride + id * stride;
      out(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(j2)) =
          rm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityMatrix(std::move(out), dims);
}

double log_negativity(const DensityMatrix& rho, Mode subsystem) {
  const DensityMatrix pt = partial_transpose(rho, subsystem);
  const Matrix herm = 0.5 * (pt.matrix() + pt.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  const double trace_norm = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, std::log2(trace_norm));
}

RabiProfile detuned_rabi_profile(double delta, double g_eff) {
  if (!(g_eff > 0)) fail(ErrorCode::InvalidArgument, "g_eff must be positive");
  const double half = 0.5 * delta;
  const double w2 = g_eff * g_eff + half * half;
  return {std::sqrt(w2), g_eff * g_eff / w2};
}

double two_photon_coupling(const SystemParams& p) { return 2.0 * std::sqrt(2.0) * p.g * p.g / p.omega_b; }

std::vector<double> symmetric_deltas(double span, std::size_t n_points) {
  if (n_points < 2 || !(span > 0)) fail(ErrorCode::InvalidArgument, "detuning scan needs span > 0 and >= 2 points");
  std::vector<double> out(n_points);
  for (std::size_t k = 0; k < n_points; ++k)
    out[k] = -span + 2.0 * span * static_cast<double>(k) / static_cast<double>(n_points - 1);
  // exact zero and exact mirror pairs
  for (std::size_t k = 0; k < n_points / 2; ++k) out[n_points - 1 - k] = -out[k];
  if (n_points % 2 == 1) out[n_points / 2] = 0.0;
  return out;
}

DetuningScan chevron_scan(const SystemParams& base, const std::vector<double>& delta_values, const TimeGrid& grid,
                          const ChevronOptions& opts) {
  if (delta_values.empty()) fail(ErrorCode::InvalidArgument, "chevron scan needs at least one detuning");
  const ModeDims& dims = opts.dims;
  const std::size_t nd = delta_values.size();
  DetuningScan scan;
  scan.delta_values = delta_values;
  scan.grid = grid;
  scan.log_negativity.assign(nd, std::vector<double>(grid.n_points, 0.0));
  scan.mirror_occupation.assign(nd, {});
  scan.transfer_amplitude.assign(nd, 0.0);

  const auto i_b = static_cast<Eigen::Index>(dims.flatten({0, 2, 0}));
  const auto i_a = static_cast<Eigen::Index>(dims.flatten({2, 0, 0}));
  const auto i_c = static_cast<Eigen::Index>(dims.flatten({0, 0, 2}));

  auto column = [&](std::size_t d) {
    SystemParams p = base;
    p.omega_b = base.omega_b + delta_values[d];
    const OpenSystem sys(p, dims);
    const DensityMatrix rho0 = DensityMatrix::pure(basis_state({0, 2, 0}, dims));
    double best = 0;
    auto observer = [&](std::size_t i, double, const DensityMatrix& rho) {
      const DensityMatrix cav = partial_trace(rho, {Mode::A, Mode::C});
      scan.log_negativity[d][i] = log_negativity(cav, Mode::A);
      const double pc = rho.matrix()(i_a, i_a).real() + rho.matrix()(i_c, i_c).real();
      const double pb = rho.matrix()(i_b, i_b).real();
      if (pc + pb > 0) best = std::max(best, pc / (pc + pb));
    };
    const MasterResult me = evolve_master(rho0, sys, grid, opts.dynamics, observer);
    scan.mirror_occupation[d] = me.occupations[static_cast<std::size_t>(Mode::B)];
    scan.transfer_amplitude[d] = best;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(nd)));
  std::vector<std::exception_ptr> errors(nd);
  std::atomic<std::size_t> cursor{0};
  auto work = [&] {
    for (std::size_t d = cursor++; d < nd; d = cursor++) {
      try {
        column(d);
      } catch (...) {
        errors[d] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return scan;
}

}  // namespace cmc
