#include <cmc/dressed.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cmc {

namespace {

int parity_of(const Occupation& occ, const ModeDims& dims, Mode m) {
  const int slot = dims.slot_of(m);
  return slot < 0 ? 0 : occ[static_cast<std::size_t>(slot)] % 2;
}

std::vector<int> bare_sectors(const ModeDims& dims) {
  std::vector<int> out(dims.total());
  for (std::size_t i = 0; i < dims.total(); ++i) {
    const Occupation occ = dims.unflatten(i);
    out[i] = 2 * parity_of(occ, dims, Mode::A) + parity_of(occ, dims, Mode::C);
  }
  return out;
}

bool conserves_parity(const Matrix& h, const std::vector<int>& sectors) {
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      if (sectors[static_cast<std::size_t>(i)] != sectors[static_cast<std::size_t>(j)] && h(i, j) != Complex(0.0))
        return false;
  return true;
}

Eigen::Index anchor_of(const Eigen::Ref<const Vector>& v) {
  // Largest component; near-ties (1e-9 relative) go to the lowest index.
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) >= top * (1.0 - 1e-9)) return i;
  return 0;
}

void fix_phase(Eigen::Ref<Vector> v) {
  const Complex c = v(anchor_of(v));
  v *= std::conj(c) / std::abs(c);
}

// Replace an eigenspace basis by the projections of bare kets, taken in
// flattened order and orthonormalised.
Matrix canonical_span(const Matrix& span) {
  const Eigen::Index n = span.rows();
  const Eigen::Index m = span.cols();
  Matrix out(n, m);
  Eigen::Index accepted = 0;
  for (Eigen::Index i = 0; i < n && accepted < m; ++i) {
    Vector v = span * span.row(i).adjoint();
    for (Eigen::Index k = 0; k < accepted; ++k) v -= out.col(k) * out.col(k).dot(v);
    const double nv = v.norm();
    if (nv > 1e-6) out.col(accepted++) = v / nv;
  }
  if (accepted < m) return span;
  return out;
}

}  // namespace

DressedBasis diagonalize(const Operator& h) {
  const Matrix& hm = h.matrix();
  const double scale = std::max(1.0, h.max_abs());
  const double herm = (hm - hm.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "Hamiltonian is not Hermitian (max |H - H^+| = " << herm << ")";
    fail(ErrorCode::NotHermitian, msg.str());
  }

  const ModeDims& dims = h.dims();
  const auto n = static_cast<Eigen::Index>(dims.total());
  std::vector<int> bare = bare_sectors(dims);
  const bool split = conserves_parity(hm, bare);
  if (!split) std::fill(bare.begin(), bare.end(), 0);
  const int sector_count = split ? 4 : 1;

  struct Eigenpair {
    double energy;
    int sector;
    Vector vec;
  };
  std::vector<Eigenpair> pairs;
  pairs.reserve(static_cast<std::size_t>(n));

  for (int s = 0; s < sector_count; ++s) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (bare[static_cast<std::size_t>(i)] == s) members.push_back(i);
    if (members.empty()) continue;
    const auto m = static_cast<Eigen::Index>(members.size());
    Matrix block(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) block(r, c) = hm(members[r], members[c]);
    block = (block + block.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(block);
    if (solver.info() != Eigen::Success) fail(ErrorCode::NotHermitian, "eigensolver did not converge");

    Matrix vecs = solver.eigenvectors();
    const RealVector& vals = solver.eigenvalues();
    for (Eigen::Index start = 0; start < m;) {
      Eigen::Index stop = start + 1;
      while (stop < m && vals(stop) - vals(stop - 1) < kDegeneracyTol) ++stop;
      if (stop - start > 1) {
        vecs.middleCols(start, stop - start) = canonical_span(vecs.middleCols(start, stop - start));
      }
      start = stop;
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      Vector full = Vector::Zero(n);
      for (Eigen::Index r = 0; r < m; ++r) full(members[r]) = vecs(r, k);
      fix_phase(full);
      pairs.push_back({vals(k), s, std::move(full)});
    }
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& x, const Eigenpair& y) { return x.energy < y.energy; });
  // Inside each run of tied energies order by anchor index.
  for (std::size_t start = 0; start < pairs.size();) {
    std::size_t stop = start + 1;
    while (stop < pairs.size() && pairs[stop].energy - pairs[stop - 1].energy < kDegeneracyTol) ++stop;
    if (stop - start > 1)
      std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(start),
                       pairs.begin() + static_cast<std::ptrdiff_t>(stop),
                       [](const Eigenpair& x, const Eigenpair& y) { return anchor_of(x.vec) < anchor_of(y.vec); });
    start = stop;
  }

  DressedBasis out;
  out.dims = dims;
  out.sector_count = sector_count;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  out.sector.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& p = pairs[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = p.energy;
    out.eigenvectors.col(k) = p.vec;
    out.sector[static_cast<std::size_t>(k)] = p.sector;
  }
  return out;
}

Matrix dressed_lowering_eigen(const DressedBasis& basis, Mode mode) {
  const Operator a = lowering(mode, basis.dims);
  const Matrix q = a.matrix() + a.matrix().adjoint();
  const Matrix& v = basis.eigenvectors;
  Matrix t = v.adjoint() * q * v;
  return t.triangularView<Eigen::StrictlyUpper>();
}

Operator dressed_lowering(const DressedBasis& basis, Mode mode) {
  const Matrix& v = basis.eigenvectors;
  return Operator(v * dressed_lowering_eigen(basis, mode) * v.adjoint(), basis.dims);
}

DressedOperatorSet dressed_operators(const DressedBasis& basis) {
  const Matrix& v = basis.eigenvectors;
  auto plus_eigen = [&](Mode m) { return dressed_lowering_eigen(basis, m); };
  std::array<Matrix, 3> eig{plus_eigen(Mode::A), plus_eigen(Mode::B), plus_eigen(Mode::C)};
  auto bare = [&](int k) { return Operator(v * eig[k] * v.adjoint(), basis.dims); };
  std::array<Operator, 3> plus{bare(0), bare(1), bare(2)};
  std::array<Operator, 3> minus{plus[0].adjoint(), plus[1].adjoint(), plus[2].adjoint()};
  return DressedOperatorSet{std::move(plus), std::move(minus), std::move(eig)};
}

namespace {

void require_normalized(double norm, const char* what) {
  if (std::abs(norm - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << what << " is not normalised (" << norm << ")";
    fail(ErrorCode::NotNormalized, msg.str());
  }
}

}  // namespace

double dressed_occupation(const StateVector& psi, const DressedOperatorSet& ops, Mode mode) {
  require_same_dims(psi.dims(), ops.plus(mode).dims(), "dressed occupation");
  require_normalized(psi.norm(), "state vector");
  return (ops.plus(mode).matrix() * psi.amplitudes()).squaredNorm();
}

double dressed_occupation(const DensityMatrix& rho, const DressedOperatorSet& ops, Mode mode) {
  require_same_dims(rho.dims(), ops.plus(mode).dims(), "dressed occupation");
  require_normalized(rho.trace().real(), "density matrix trace");
  const Matrix& xp = ops.plus(mode).matrix();
  return (xp * rho.matrix() * xp.adjoint()).trace().real();
}

}  // namespace cmc
