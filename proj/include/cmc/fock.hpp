#ifndef CMC_FOCK_HPP
#define CMC_FOCK_HPP

// Bosonic ladder operators on truncated Fock spaces.
//
// Multi-mode spaces are flattened row-major over the mode list, so for the
// three-mode space [a, b, c] the ket |n_a, n_b, n_c> lives at
//     index = (n_a * dim_b + n_b) * dim_c + n_c.
// The dense matrix type is confined to this header; everything above it goes
// through Operator / StateVector.

#include <cmc/error.hpp>

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <vector>

namespace cmc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

enum class Mode : int { A = 0, B = 1, C = 2 };

char mode_name(Mode m);
Mode mode_from_index(int i);

using Occupation = std::vector<int>;

class ModeDims {
 public:
  ModeDims() = default;
  // Three-mode space in the fixed [a, b, c] order.
  ModeDims(int dim_a, int dim_b, int dim_c);
  ModeDims(std::vector<int> sizes, std::vector<Mode> modes);

  static ModeDims three(const std::array<int, 3>& sizes) {
    return ModeDims(sizes[0], sizes[1], sizes[2]);
  }

  std::size_t mode_count() const { return sizes_.size(); }
  int size(std::size_t slot) const { return sizes_.at(slot); }
  Mode mode(std::size_t slot) const { return modes_.at(slot); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Mode>& modes() const { return modes_; }

  // Slot of `m` in this space, or -1 when the mode is not present.
  int slot_of(Mode m) const;
  std::size_t total() const { return total_; }

  std::size_t flatten(const Occupation& occ) const;
  Occupation unflatten(std::size_t index) const;

  bool operator==(const ModeDims& other) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<Mode> modes_;
  std::size_t total_ = 0;
};

class Operator {
 public:
  Operator(Matrix matrix, ModeDims dims);

  static Operator identity(const ModeDims& dims);
  static Operator zero(const ModeDims& dims);

  const Matrix& matrix() const { return matrix_; }
  const ModeDims& dims() const { return dims_; }
  std::size_t dimension() const { return dims_.total(); }

  Operator adjoint() const;
  bool is_hermitian(double tol) const;
  // max_ij |M_ij|
  double max_abs() const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(Operator lhs, Complex s) { return lhs *= s; }
  friend Operator operator*(Complex s, Operator rhs) { return rhs *= s; }
  friend Operator operator*(double s, Operator rhs) { return rhs *= Complex(s, 0.0); }
  friend Operator operator-(Operator op) { return op *= Complex(-1.0, 0.0); }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  Matrix matrix_;
  ModeDims dims_;
};

class StateVector {
 public:
  StateVector(Vector amplitudes, ModeDims dims);

  const Vector& amplitudes() const { return amplitudes_; }
  const ModeDims& dims() const { return dims_; }
  double norm() const { return amplitudes_.norm(); }

 private:
  Vector amplitudes_;
  ModeDims dims_;
};

class DensityMatrix {
 public:
  DensityMatrix(Matrix matrix, ModeDims dims);
  static DensityMatrix pure(const StateVector& psi);

  const Matrix& matrix() const { return matrix_; }
  const ModeDims& dims() const { return dims_; }
  Complex trace() const { return matrix_.trace(); }

 private:
  Matrix matrix_;
  ModeDims dims_;
};

// Single-mode operators. Their ModeDims is a one-slot space tagged with mode A;
// embed() re-tags them.
Operator annihilator(int n);
Operator creator(int n);
Operator number_operator(int n);

Operator embed(const Operator& single, Mode mode, const ModeDims& dims);

// Embedded ladder operator of `mode` in `dims`.
Operator lowering(Mode mode, const ModeDims& dims);

Operator commutator(const Operator& a, const Operator& b);

StateVector basis_state(const Occupation& occ, const ModeDims& dims);

void require_same_dims(const ModeDims& a, const ModeDims& b, const char* what);

// Versioned text dump:
//   cmc-operator 1
//   modes <count> <mode letters...>
//   sizes <n...>
//   <row-major entries, one "re im" pair per line>
void write_operator(std::ostream& out, const Operator& op);
Operator read_operator(std::istream& in);

}  // namespace cmc

#endif
