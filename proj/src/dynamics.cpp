#include <cmc/dynamics.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace cmc {

namespace {

constexpr std::array<Mode, 3> kModes{Mode::A, Mode::B, Mode::C};

Matrix gather(const Matrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
  return out;
}

// e^{i E t} per sector.
std::vector<Vector> phases(const OpenSystem& sys, double t) {
  std::vector<Vector> u(static_cast<std::size_t>(sys.sector_count()));
  for (int s = 0; s < sys.sector_count(); ++s) {
    const RealVector& e = sys.energies(s);
    Vector& us = u[static_cast<std::size_t>(s)];
    us.resize(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) us(k) = std::polar(1.0, e(k) * t);
  }
  return u;
}

void require_normalized_state(double norm) {
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "initial state is not normalised (norm " << norm << ")";
    fail(ErrorCode::NotNormalized, msg.str());
  }
}

}  // namespace

TimeGrid::TimeGrid(double start, double end, std::size_t points) : t_start(start), t_end(end), n_points(points) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(end > start))
    fail(ErrorCode::InvalidArgument, "time grid needs t_end > t_start");
  if (points < 2) fail(ErrorCode::InvalidArgument, "time grid needs at least 2 points");
}

double TimeGrid::at(std::size_t i) const {
  if (i + 1 == n_points) return t_end;
  return t_start + (t_end - t_start) * static_cast<double>(i) / static_cast<double>(n_points - 1);
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i) out[i] = at(i);
  return out;
}

OpenSystem::OpenSystem(const SystemParams& params, const ModeDims& dims)
    : params_(params),
      dims_(dims),
      hamiltonian_((params.validate(), build_full_hamiltonian(params, dims))),
      basis_(diagonalize(hamiltonian_)),
      ops_(dressed_operators(basis_)) {
  const auto n = static_cast<Eigen::Index>(dims_.total());
  const auto sectors = static_cast<std::size_t>(basis_.sector_count);
  members_.assign(sectors, {});
  for (Eigen::Index k = 0; k < n; ++k) members_[static_cast<std::size_t>(basis_.sector[static_cast<std::size_t>(k)])].push_back(k);

  energies_.resize(sectors);
  offsets_.resize(sectors);
  Eigen::Index off = 0;
  for (std::size_t s = 0; s < sectors; ++s) {
    offsets_[s] = off;
    energies_[s].resize(static_cast<Eigen::Index>(members_[s].size()));
    for (std::size_t r = 0; r < members_[s].size(); ++r)
      energies_[s](static_cast<Eigen::Index>(r)) = basis_.eigenvalues(members_[s][r]);
    off += static_cast<Eigen::Index>(members_[s].size());
  }

  decay_.resize(sectors);
  for (std::size_t s = 0; s < sectors; ++s) {
    const auto m = static_cast<Eigen::Index>(members_[s].size());
    decay_[s] = Matrix::Zero(m, m);
  }
  for (Mode o : kModes) {
    const Matrix& x = ops_.x_plus_eigen[idx(o)];
    target_[idx(o)].assign(sectors, -1);
    jump_[idx(o)].resize(sectors);
    number_[idx(o)].resize(sectors);
    for (std::size_t s = 0; s < sectors; ++s) {
      const auto m = static_cast<Eigen::Index>(members_[s].size());
      number_[idx(o)][s] = Matrix::Zero(m, m);
      for (std::size_t t = 0; t < sectors; ++t) {
        Matrix block = gather(x, members_[t], members_[s]);
        if (block.size() == 0 || block.cwiseAbs().maxCoeff() == 0.0) continue;
        if (target_[idx(o)][s] >= 0)
          fail(ErrorCode::InvalidArgument, "dressed jump operator couples one sector to several sectors");
        target_[idx(o)][s] = static_cast<int>(t);
        number_[idx(o)][s] = block.adjoint() * block;
        jump_[idx(o)][s] = std::move(block);
      }
      decay_[s] += params_.gamma(o) * number_[idx(o)][s];
    }
  }
}

Vector OpenSystem::to_packed(const Vector& bare) const {
  const Vector d = basis_.eigenvectors.adjoint() * bare;
  Vector out(d.size());
  for (int s = 0; s < sector_count(); ++s)
    for (std::size_t r = 0; r < members(s).size(); ++r)
      out(offset(s) + static_cast<Eigen::Index>(r)) = d(members(s)[r]);
  return out;
}

Vector OpenSystem::from_packed(const Vector& packed) const {
  Vector d(packed.size());
  for (int s = 0; s < sector_count(); ++s)
    for (std::size_t r = 0; r < members(s).size(); ++r)
      d(members(s)[r]) = packed(offset(s) + static_cast<Eigen::Index>(r));
  return basis_.eigenvectors * d;
}

Matrix lindblad_rhs(const DensityMatrix& rho, const Operator& h, const std::vector<Operator>& jump_ops,
                    const std::vector<double>& rates) {
  require_same_dims(rho.dims(), h.dims(), "lindblad_rhs");
  if (jump_ops.size() != rates.size()) fail(ErrorCode::InvalidArgument, "one rate per jump operator required");
  const Matrix& r = rho.matrix();
  const Complex i(0.0, 1.0);
  Matrix out = -i * (h.matrix() * r - r * h.matrix());
  for (std::size_t k = 0; k < jump_ops.size(); ++k) {
    if (rates[k] < 0) fail(ErrorCode::InvalidArgument, "negative dissipation rate");
    if (rates[k] == 0) continue;
    require_same_dims(rho.dims(), jump_ops[k].dims(), "lindblad_rhs");
    const Matrix& x = jump_ops[k].matrix();
    const Matrix n = x.adjoint() * x;
    out += rates[k] * (x * r * x.adjoint() - 0.5 * (n * r + r * n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Master equation

namespace {

struct BlockPair {
  int row, col;
  Eigen::Index offset;  // into the flattened state
};

class MasterModel {
 public:
  MasterModel(const OpenSystem& sys, const Matrix& rho_packed) : sys_(sys) {
    const int ns = sys.sector_count();
    index_.assign(static_cast<std::size_t>(ns * ns), -1);
    std::vector<std::pair<int, int>> queue;
    auto activate = [&](int a, int b) {
      if (index_[static_cast<std::size_t>(a * ns + b)] >= 0) return;
      index_[static_cast<std::size_t>(a * ns + b)] = 0;
      queue.emplace_back(a, b);
    };
    for (int a = 0; a < ns; ++a)
      for (int b = 0; b < ns; ++b) {
        const Matrix blk = rho_packed.block(sys.offset(a), sys.offset(b), size(a), size(b));
        if (blk.size() > 0 && blk.cwiseAbs().maxCoeff() > 0.0) {
          activate(a, b);
          activate(b, a);
        }
      }
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const auto [a, b] = queue[q];
      for (Mode o : kModes) {
        if (sys.params().gamma(o) == 0.0) continue;
        const int ta = sys.target(o, a), tb = sys.target(o, b);
        if (ta >= 0 && tb >= 0) activate(ta, tb);
      }
    }
    std::sort(queue.begin(), queue.end());
    Eigen::Index off = 0;
    for (const auto& [a, b] : queue) {
      index_[static_cast<std::size_t>(a * ns + b)] = static_cast<int>(pairs_.size());
      pairs_.push_back({a, b, off});
      off += size(a) * size(b);
      if (a != b) diagonal_only_ = false;
    }
    length_ = off;
    rho_.resize(pairs_.size());
    drho_.resize(pairs_.size());
  }

  Eigen::Index length() const { return length_; }
  const std::vector<BlockPair>& pairs() const { return pairs_; }
  bool diagonal_only() const { return diagonal_only_; }
  Eigen::Index size(int s) const { return static_cast<Eigen::Index>(sys_.members(s).size()); }
  int pair_index(int a, int b) const { return index_[static_cast<std::size_t>(a * sys_.sector_count() + b)]; }

  // Schrodinger-picture block <- interaction-picture block and back.
  Vector pack(const Matrix& rho_packed, double t) const {
    const auto u = phases(sys_, t);
    Vector y(length_);
    for (const auto& p : pairs_) {
      Matrix blk = rho_packed.block(sys_.offset(p.row), sys_.offset(p.col), size(p.row), size(p.col));
      blk = u[p.row].asDiagonal() * blk * u[p.col].conjugate().asDiagonal();
      Eigen::Map<Matrix>(y.data() + p.offset, size(p.row), size(p.col)) = blk;
    }
    return y;
  }

  std::vector<Matrix> schrodinger_blocks(const Vector& y, double t) const {
    const auto u = phases(sys_, t);
    std::vector<Matrix> out(pairs_.size());
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      Eigen::Map<const Matrix> sigma(y.data() + p.offset, size(p.row), size(p.col));
      out[k] = u[p.row].conjugate().asDiagonal() * sigma * u[p.col].asDiagonal();
    }
    return out;
  }

  void rhs(double t, const Vector& y, Vector& dy) {
    const auto u = phases(sys_, t);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      Eigen::Map<const Matrix> sigma(y.data() + p.offset, size(p.row), size(p.col));
      rho_[k].noalias() = u[p.row].conjugate().asDiagonal() * sigma * u[p.col].asDiagonal();
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      drho_[k].noalias() = -0.5 * (sys_.decay(p.row) * rho_[k]);
      drho_[k].noalias() -= 0.5 * (rho_[k] * sys_.decay(p.col));
    }
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      for (Mode o : kModes) {
        const double g = sys_.params().gamma(o);
        if (g == 0.0) continue;
        const int ta = sys_.target(o, p.row), tb = sys_.target(o, p.col);
        if (ta < 0 || tb < 0) continue;
        const int dst = pair_index(ta, tb);
        tmp_.noalias() = sys_.jump(o, p.row) * rho_[k];
        drho_[static_cast<std::size_t>(dst)].noalias() += g * (tmp_ * sys_.jump(o, p.col).adjoint());
      }
    }
    dy.resize(length_);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      Eigen::Map<Matrix>(dy.data() + p.offset, size(p.row), size(p.col)).noalias() =
          u[p.row].asDiagonal() * drho_[k] * u[p.col].conjugate().asDiagonal();
    }
  }

  Matrix assemble(const std::vector<Matrix>& blocks) const {
    const auto n = static_cast<Eigen::Index>(sys_.dims().total());
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto& p = pairs_[k];
      out.block(sys_.offset(p.row), sys_.offset(p.col), size(p.row), size(p.col)) = blocks[k];
    }
    return out;
  }

 private:
  const OpenSystem& sys_;
  std::vector<int> index_;
  std::vector<BlockPair> pairs_;
  Eigen::Index length_ = 0;
  bool diagonal_only_ = true;
  std::vector<Matrix> rho_, drho_;
  Matrix tmp_;
};

Matrix packed_vectors(const OpenSystem& sys) {
  const Matrix& v = sys.basis().eigenvectors;
  Matrix out(v.rows(), v.cols());
  for (int s = 0; s < sys.sector_count(); ++s)
    for (std::size_t r = 0; r < sys.members(s).size(); ++r)
      out.col(sys.offset(s) + static_cast<Eigen::Index>(r)) = v.col(sys.members(s)[r]);
  return out;
}

}  // namespace

MasterResult evolve_master(const DensityMatrix& rho0, const OpenSystem& sys, const TimeGrid& grid,
                           const DynamicsOptions& opts, const MasterObserver& observer) {
  require_same_dims(rho0.dims(), sys.dims(), "evolve_master");
  const double tr0 = rho0.trace().real();
  if (std::abs(tr0 - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "initial density matrix trace is " << tr0;
    fail(ErrorCode::NotNormalized, msg.str());
  }
  const Matrix vp = packed_vectors(sys);
  const Matrix rho_packed = vp.adjoint() * rho0.matrix() * vp;
  MasterModel model(sys, rho_packed);

  MasterResult res{grid, {}, {}, {}, rho0, 0};
  for (auto& series : res.occupations) series.assign(grid.n_points, 0.0);
  res.trace.assign(grid.n_points, 0.0);
  res.min_eigenvalue.assign(grid.n_points, 0.0);

  auto record = [&](std::size_t i, double t, const Vector& y) {
    const auto blocks = model.schrodinger_blocks(y, t);
    double trace = 0;
    std::array<double, 3> occ{0, 0, 0};
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < model.pairs().size(); ++k) {
      const auto& p = model.pairs()[k];
      if (p.row != p.col) continue;
      trace += blocks[k].trace().real();
      for (Mode o : kModes)
        occ[static_cast<std::size_t>(o)] += (sys.number(o, p.row) * blocks[k]).trace().real();
      if (model.diagonal_only()) {
        const Matrix herm = 0.5 * (blocks[k] + blocks[k].adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      }
    }
    Matrix full;
    if (!model.diagonal_only() || observer || i + 1 == grid.n_points) full = model.assemble(blocks);
    if (!model.diagonal_only()) {
      const Matrix herm = 0.5 * (full + full.adjoint());
      Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
      min_eig = es.eigenvalues().minCoeff();
    }
    res.trace[i] = trace;
    res.min_eigenvalue[i] = min_eig;
    for (std::size_t m = 0; m < 3; ++m) res.occupations[m][i] = occ[m];
    if (observer || i + 1 == grid.n_points) {
      DensityMatrix bare(vp * full * vp.adjoint(), sys.dims());
      if (observer) observer(i, t, bare);
      if (i + 1 == grid.n_points) res.final_state = std::move(bare);
    }
  };

  DormandPrince45 ode([&model](double t, const Vector& y, Vector& dy) { model.rhs(t, y, dy); }, opts.ode);
  double t = grid.t_start;
  Vector y = model.pack(rho_packed, t);
  record(0, t, y);
  std::size_t next = 1;
  Vector f0(y.size());
  ode.eval(t, y, f0);
  double h = ode.initial_step(t, y, f0, grid.t_end);
  while (next < grid.n_points) {
    auto s = ode.step(t, y, f0, h, grid.t_end);
    const bool last = s.t1() >= grid.t_end;
    while (next < grid.n_points && (grid.at(next) <= s.t1() || last)) {
      const double tg = grid.at(next);
      record(next, tg, tg >= s.t1() ? s.y1 : DormandPrince45::interpolate(s, tg));
      ++next;
    }
    t = last ? grid.t_end : s.t1();
    y = std::move(s.y1);
    f0 = std::move(s.k7);
    h = s.h_next;
  }
  res.steps = ode.steps_accepted();
  return res;
}

MasterResult evolve_master(const DensityMatrix& rho0, const SystemParams& params, const ModeDims& dims,
                           const TimeGrid& grid, const DynamicsOptions& opts) {
  const OpenSystem sys(params, dims);
  return evolve_master(rho0, sys, grid, opts);
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

class TrajectoryModel {
 public:
  explicit TrajectoryModel(const OpenSystem& sys) : sys_(sys) {
    for (int s = 0; s < sys.sector_count(); ++s)
      active_.push_back(sys.decay(s).size() > 0 && sys.decay(s).cwiseAbs().maxCoeff() > 0.0);
  }

  void rhs(double t, const Vector& y, Vector& dy) const {
    dy.resize(y.size());
    for (int s = 0; s < sys_.sector_count(); ++s) {
      const auto n = static_cast<Eigen::Index>(sys_.members(s).size());
      if (n == 0) continue;
      auto out = dy.segment(sys_.offset(s), n);
      if (!active_[static_cast<std::size_t>(s)]) {
        out.setZero();
        continue;
      }
      Vector u(n);
      const RealVector& e = sys_.energies(s);
      for (Eigen::Index k = 0; k < n; ++k) u(k) = std::polar(1.0, e(k) * t);
      const Vector psi = u.conjugate().cwiseProduct(y.segment(sys_.offset(s), n));
      out = -0.5 * u.cwiseProduct(sys_.decay(s) * psi);
    }
  }

  // Interaction-picture amplitudes -> Schrodinger eigenbasis amplitudes.
  Vector schrodinger(const Vector& y, double t) const {
    Vector out(y.size());
    for (int s = 0; s < sys_.sector_count(); ++s) {
      const RealVector& e = sys_.energies(s);
      for (Eigen::Index k = 0; k < e.size(); ++k)
        out(sys_.offset(s) + k) = std::polar(1.0, -e(k) * t) * y(sys_.offset(s) + k);
    }
    return out;
  }

  Vector interaction(const Vector& psi, double t) const {
    Vector out(psi.size());
    for (int s = 0; s < sys_.sector_count(); ++s) {
      const RealVector& e = sys_.energies(s);
      for (Eigen::Index k = 0; k < e.size(); ++k)
        out(sys_.offset(s) + k) = std::polar(1.0, e(k) * t) * psi(sys_.offset(s) + k);
    }
    return out;
  }

  std::array<double, 3> occupations(const Vector& psi) const {
    const double n2 = psi.squaredNorm();
    std::array<double, 3> occ{0, 0, 0};
    for (Mode o : kModes) {
      double acc = 0;
      for (int s = 0; s < sys_.sector_count(); ++s) {
        const int t = sys_.target(o, s);
        if (t < 0) continue;
        const auto n = static_cast<Eigen::Index>(sys_.members(s).size());
        acc += (sys_.jump(o, s) * psi.segment(sys_.offset(s), n)).squaredNorm();
      }
      occ[static_cast<std::size_t>(o)] = acc / n2;
    }
    return occ;
  }

  // Apply X_o^+ to Schrodinger amplitudes.
  Vector apply_jump(Mode o, const Vector& psi) const {
    Vector out = Vector::Zero(psi.size());
    for (int s = 0; s < sys_.sector_count(); ++s) {
      const int t = sys_.target(o, s);
      if (t < 0) continue;
      const auto n = static_cast<Eigen::Index>(sys_.members(s).size());
      const auto m = static_cast<Eigen::Index>(sys_.members(t).size());
      out.segment(sys_.offset(t), m) += sys_.jump(o, s) * psi.segment(sys_.offset(s), n);
    }
    return out;
  }

 private:
  const OpenSystem& sys_;
  std::vector<bool> active_;
};

double uniform_open(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

TrajectoryResult evolve_trajectory(const StateVector& psi0, const OpenSystem& sys, const TimeGrid& grid,
                                   std::uint64_t seed, const DynamicsOptions& opts) {
  require_same_dims(psi0.dims(), sys.dims(), "evolve_trajectory");
  require_normalized_state(psi0.norm());
  const TrajectoryModel model(sys);
  std::mt19937_64 gen(seed);

  TrajectoryResult res;
  res.grid = grid;
  res.seed = seed;
  for (auto& series : res.occupations) series.assign(grid.n_points, 0.0);

  auto record = [&](std::size_t i, double t, const Vector& y) {
    const auto occ = model.occupations(model.schrodinger(y, t));
    for (std::size_t m = 0; m < 3; ++m) res.occupations[m][i] = occ[m];
  };

  DormandPrince45 ode([&model](double t, const Vector& y, Vector& dy) { model.rhs(t, y, dy); }, opts.ode);
  double t = grid.t_start;
  Vector y = model.interaction(sys.to_packed(psi0.amplitudes() / psi0.norm()), t);
  record(0, t, y);
  std::size_t next = 1;
  double threshold = uniform_open(gen);

  Vector f0(y.size());
  ode.eval(t, y, f0);
  double h = ode.initial_step(t, y, f0, grid.t_end);

  while (next < grid.n_points) {
    const double n0 = y.squaredNorm();
    auto s = ode.step(t, y, f0, h, grid.t_end);
    const double n1 = s.y1.squaredNorm();
    if (!std::isfinite(n1) || n1 <= 0.0) {
      std::ostringstream msg;
      msg << "state norm underflow at t = " << s.t1() << " without a detected jump";
      fail(ErrorCode::JumpFailure, msg.str());
    }
    res.max_norm_increase = std::max(res.max_norm_increase, n1 - n0);
    if (n1 - n0 > opts.norm_increase_tol) {
      std::ostringstream msg;
      msg << "squared norm increased by " << n1 - n0 << " over step [" << s.t0 << ", " << s.t1() << "]";
      fail(ErrorCode::Integrator, msg.str());
    }

    if (n1 >= threshold) {
      const bool last = s.t1() >= grid.t_end;
      while (next < grid.n_points && (grid.at(next) <= s.t1() || last)) {
        const double tg = grid.at(next);
        record(next, tg, tg >= s.t1() ? s.y1 : DormandPrince45::interpolate(s, tg));
        ++next;
      }
      t = last ? grid.t_end : s.t1();
      y = std::move(s.y1);
      f0 = std::move(s.k7);
      h = s.h_next;
      continue;
    }

    // Threshold crossed inside the step: bisect, re-integrating from the step start.
    double lo = s.t0, hi = s.t1();
    double n_lo = n0, n_hi = n1;
    Vector y_hi = s.y1;
    while (hi - lo > 0.5 * opts.jump_time_tol) {
      const double mid = 0.5 * (lo + hi);
      Vector ym = ode.single_step(s.t0, s.y0, s.k1, mid - s.t0);
      const double nm = ym.squaredNorm();
      if (nm >= threshold) {
        lo = mid;
        n_lo = nm;
      } else {
        hi = mid;
        n_hi = nm;
        y_hi = std::move(ym);
      }
    }
    while (next < grid.n_points && grid.at(next) <= hi) {
      const double tg = grid.at(next);
      record(next, tg, tg >= hi ? y_hi : DormandPrince45::interpolate(s, tg));
      ++next;
    }

    const Vector psi = model.schrodinger(y_hi, hi);
    std::array<double, 3> weight{0, 0, 0};
    double total = 0;
    for (Mode o : kModes) {
      const double g = sys.params().gamma(o);
      if (g == 0.0) continue;
      weight[static_cast<std::size_t>(o)] = g * model.apply_jump(o, psi).squaredNorm();
      total += weight[static_cast<std::size_t>(o)];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      std::ostringstream msg;
      msg << "zero total jump rate at threshold crossing t = " << hi;
      fail(ErrorCode::JumpFailure, msg.str());
    }
    const double pick = uniform_open(gen) * total;
    Mode channel = Mode::A;
    double acc = 0;
    for (Mode o : kModes) {
      if (weight[static_cast<std::size_t>(o)] == 0.0) continue;
      channel = o;
      acc += weight[static_cast<std::size_t>(o)];
      if (pick < acc) break;
    }
    Vector jumped = model.apply_jump(channel, psi);
    jumped /= jumped.norm();
    res.jumps.push_back({hi, channel, lo, n_lo, n_hi, threshold});
    threshold = uniform_open(gen);

    t = hi;
    y = model.interaction(jumped, t);
    ode.eval(t, y, f0);
    h = std::max(s.h, 10 * opts.jump_time_tol);
  }
  return res;
}

TrajectoryResult evolve_trajectory(const StateVector& psi0, const SystemParams& params, const ModeDims& dims,
                                   const TimeGrid& grid, std::uint64_t seed, const DynamicsOptions& opts) {
  const OpenSystem sys(params, dims);
  return evolve_trajectory(psi0, sys, grid, seed, opts);
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t index) {
  std::uint64_t z = base_seed + (static_cast<std::uint64_t>(index) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<TrajectoryResult> run_trajectories(const StateVector& psi0, const OpenSystem& sys, const TimeGrid& grid,
                                               std::size_t n_traj, std::uint64_t base_seed, unsigned workers,
                                               const DynamicsOptions& opts) {
  if (n_traj == 0) fail(ErrorCode::InvalidArgument, "n_traj must be >= 1");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_traj));

  std::vector<TrajectoryResult> out(n_traj);
  std::vector<std::exception_ptr> errors(n_traj);
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = cursor++; i < n_traj && !failed; i = cursor++) {
      try {
        out[i] = evolve_trajectory(psi0, sys, grid, trajectory_seed(base_seed, i), opts);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

EnsembleResult ensemble_mean(const std::vector<TrajectoryResult>& runs, std::size_t n, std::uint64_t base_seed) {
  if (n == 0 || n > runs.size()) fail(ErrorCode::InvalidArgument, "ensemble size out of range");
  EnsembleResult res;
  res.grid = runs.front().grid;
  res.n_traj = n;
  res.base_seed = base_seed;
  for (std::size_t m = 0; m < 3; ++m) {
    auto& mean = res.occupations[m];
    mean.assign(res.grid.n_points, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += runs[k].occupations[m][i];
    for (double& v : mean) v /= static_cast<double>(n);
  }
  return res;
}

EnsembleResult average_trajectories(const StateVector& psi0, const OpenSystem& sys, const TimeGrid& grid,
                                    std::size_t n_traj, std::uint64_t base_seed, unsigned workers,
                                    const DynamicsOptions& opts) {
  const auto runs = run_trajectories(psi0, sys, grid, n_traj, base_seed, workers, opts);
  return ensemble_mean(runs, n_traj, base_seed);
}

ModeSeries unitary_occupations(const StateVector& psi0, const OpenSystem& sys, const TimeGrid& grid) {
  require_same_dims(psi0.dims(), sys.dims(), "unitary_occupations");
  require_normalized_state(psi0.norm());
  const TrajectoryModel model(sys);
  const Vector packed = sys.to_packed(psi0.amplitudes());
  ModeSeries out;
  for (auto& series : out) series.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const auto occ = model.occupations(model.schrodinger(packed, grid.at(i)));
    for (std::size_t m = 0; m < 3; ++m) out[m][i] = occ[m];
  }
  return out;
}

double max_abs_deviation(const ModeSeries& a, const ModeSeries& b) {
  double worst = 0;
  for (std::size_t m = 0; m < 3; ++m) {
    if (a[m].size() != b[m].size()) fail(ErrorCode::DimensionMismatch, "series lengths differ");
    for (std::size_t i = 0; i < a[m].size(); ++i) worst = std::max(worst, std::abs(a[m][i] - b[m][i]));
  }
  return worst;
}

}  // namespace cmc
