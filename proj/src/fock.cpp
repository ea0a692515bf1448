#include <cmc/fock.hpp>

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace cmc {

char mode_name(Mode m) {
  switch (m) {
    case Mode::A: return 'a';
    case Mode::B: return 'b';
    case Mode::C: return 'c';
  }
  return '?';
}

Mode mode_from_index(int i) {
  if (i < 0 || i > 2) fail(ErrorCode::InvalidArgument, "mode index must be 0, 1 or 2");
  return static_cast<Mode>(i);
}

ModeDims::ModeDims(int dim_a, int dim_b, int dim_c)
    : ModeDims({dim_a, dim_b, dim_c}, {Mode::A, Mode::B, Mode::C}) {}

ModeDims::ModeDims(std::vector<int> sizes, std::vector<Mode> modes)
    : sizes_(std::move(sizes)), modes_(std::move(modes)) {
  if (sizes_.empty() || sizes_.size() != modes_.size())
    fail(ErrorCode::InvalidArgument, "mode list and size list must be non-empty and equal length");
  total_ = 1;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 2)
      fail(ErrorCode::InvalidTruncation,
           std::string("truncation of mode ") + mode_name(modes_[i]) + " must be >= 2");
    for (std::size_t j = 0; j < i; ++j)
      if (modes_[j] == modes_[i]) fail(ErrorCode::InvalidArgument, "duplicate mode in ModeDims");
    total_ *= static_cast<std::size_t>(sizes_[i]);
  }
}

int ModeDims::slot_of(Mode m) const {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i] == m) return static_cast<int>(i);
  return -1;
}

std::size_t ModeDims::flatten(const Occupation& occ) const {
  if (occ.size() != sizes_.size())
    fail(ErrorCode::InvalidArgument, "occupation tuple length does not match mode count");
  std::size_t index = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (occ[i] < 0 || occ[i] >= sizes_[i]) {
      std::ostringstream msg;
      msg << "occupation " << occ[i] << " of mode " << mode_name(modes_[i])
          << " outside truncation " << sizes_[i];
      fail(ErrorCode::InvalidArgument, msg.str());
    }
    index = index * static_cast<std::size_t>(sizes_[i]) + static_cast<std::size_t>(occ[i]);
  }
  return index;
}

Occupation ModeDims::unflatten(std::size_t index) const {
  if (index >= total_) fail(ErrorCode::InvalidArgument, "flattened index out of range");
  Occupation occ(sizes_.size());
  for (std::size_t i = sizes_.size(); i-- > 0;) {
    occ[i] = static_cast<int>(index % static_cast<std::size_t>(sizes_[i]));
    index /= static_cast<std::size_t>(sizes_[i]);
  }
  return occ;
}

void require_same_dims(const ModeDims& a, const ModeDims& b, const char* what) {
  if (!(a == b)) fail(ErrorCode::DimensionMismatch, std::string(what) + ": mode dimensions differ");
}

Operator::Operator(Matrix matrix, ModeDims dims) : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  const auto n = static_cast<Eigen::Index>(dims_.total());
  if (matrix_.rows() != n || matrix_.cols() != n)
    fail(ErrorCode::DimensionMismatch, "operator matrix size does not match Hilbert dimension");
}

Operator Operator::identity(const ModeDims& dims) {
  const auto n = static_cast<Eigen::Index>(dims.total());
  return Operator(Matrix::Identity(n, n), dims);
}

Operator Operator::zero(const ModeDims& dims) {
  const auto n = static_cast<Eigen::Index>(dims.total());
  return Operator(Matrix::Zero(n, n), dims);
}

Operator Operator::adjoint() const { return Operator(matrix_.adjoint(), dims_); }

bool Operator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double Operator::max_abs() const {
  return matrix_.size() == 0 ? 0.0 : matrix_.cwiseAbs().maxCoeff();
}

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_dims(dims_, rhs.dims_, "operator sum");
  matrix_ += rhs.matrix_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_dims(dims_, rhs.dims_, "operator difference");
  matrix_ -= rhs.matrix_;
  return *this;
}

Operator& Operator::operator*=(Complex s) {
  matrix_ *= s;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_dims(lhs.dims_, rhs.dims_, "operator product");
  return Operator(lhs.matrix_ * rhs.matrix_, lhs.dims_);
}

StateVector::StateVector(Vector amplitudes, ModeDims dims)
    : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
  if (amplitudes_.size() != static_cast<Eigen::Index>(dims_.total()))
    fail(ErrorCode::DimensionMismatch, "state vector length does not match Hilbert dimension");
}

DensityMatrix::DensityMatrix(Matrix matrix, ModeDims dims) : matrix_(std::move(matrix)), dims_(std::move(dims)) {
  const auto n = static_cast<Eigen::Index>(dims_.total());
  if (matrix_.rows() != n || matrix_.cols() != n)
    fail(ErrorCode::DimensionMismatch, "density matrix size does not match Hilbert dimension");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.dims());
}

Operator annihilator(int n) {
  if (n < 2) fail(ErrorCode::InvalidTruncation, "Fock truncation must be >= 2");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) m(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return Operator(std::move(m), ModeDims({n}, {Mode::A}));
}

Operator creator(int n) { return annihilator(n).adjoint(); }

Operator number_operator(int n) {
  if (n < 2) fail(ErrorCode::InvalidTruncation, "Fock truncation must be >= 2");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return Operator(std::move(m), ModeDims({n}, {Mode::A}));
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Operator embed(const Operator& single, Mode mode, const ModeDims& dims) {
  if (single.dims().mode_count() != 1)
    fail(ErrorCode::InvalidArgument, "embed expects a single-mode operator");
  const int slot = dims.slot_of(mode);
  if (slot < 0) fail(ErrorCode::DimensionMismatch, std::string("mode ") + mode_name(mode) + " not in target space");
  if (single.dims().size(0) != dims.size(static_cast<std::size_t>(slot)))
    fail(ErrorCode::DimensionMismatch,
         std::string("single-mode operator dimension does not match truncation of mode ") + mode_name(mode));

  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < dims.mode_count(); ++i) {
    if (static_cast<int>(i) == slot)
      out = kron(out, single.matrix());
    else
      out = kron(out, Matrix::Identity(dims.size(i), dims.size(i)));
  }
  return Operator(std::move(out), dims);
}

Operator lowering(Mode mode, const ModeDims& dims) {
  const int slot = dims.slot_of(mode);
  if (slot < 0) fail(ErrorCode::DimensionMismatch, std::string("mode ") + mode_name(mode) + " not in target space");
  return embed(annihilator(dims.size(static_cast<std::size_t>(slot))), mode, dims);
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dims(a.dims(), b.dims(), "commutator");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix(), a.dims());
}

StateVector basis_state(const Occupation& occ, const ModeDims& dims) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
  v(static_cast<Eigen::Index>(dims.flatten(occ))) = 1.0;
  return StateVector(std::move(v), dims);
}

void write_operator(std::ostream& out, const Operator& op) {
  const auto& dims = op.dims();
  out << "cmc-operator 1\n";
  out << "modes " << dims.mode_count();
  for (Mode m : dims.modes()) out << ' ' << mode_name(m);
  out << "\nsizes";
  for (int s : dims.sizes()) out << ' ' << s;
  out << '\n' << std::setprecision(17);
  const Matrix& m = op.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

Operator read_operator(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "cmc-operator")
    fail(ErrorCode::Io, "not a cmc-operator dump");
  if (version != 1) fail(ErrorCode::Io, "unsupported cmc-operator version " + std::to_string(version));

  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "modes" || count == 0 || count > 3)
    fail(ErrorCode::Io, "malformed modes line in operator dump");
  std::vector<Mode> modes;
  for (std::size_t i = 0; i < count; ++i) {
    char c = 0;
    in >> c;
    if (c < 'a' || c > 'c') fail(ErrorCode::Io, "unknown mode letter in operator dump");
    modes.push_back(static_cast<Mode>(c - 'a'));
  }
  if (!(in >> tag) || tag != "sizes") fail(ErrorCode::Io, "missing sizes line in operator dump");
  std::vector<int> sizes(count);
  for (auto& s : sizes)
    if (!(in >> s)) fail(ErrorCode::Io, "truncated sizes line in operator dump");

  ModeDims dims(std::move(sizes), std::move(modes));
  const auto n = static_cast<Eigen::Index>(dims.total());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double re = 0, im = 0;
      if (!(in >> re >> im)) fail(ErrorCode::Io, "operator dump ends early");
      m(i, j) = Complex(re, im);
    }
  return Operator(std::move(m), std::move(dims));
}

}  // namespace cmc
