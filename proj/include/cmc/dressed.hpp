#ifndef CMC_DRESSED_HPP
#define CMC_DRESSED_HPP

// Energy eigenbasis of the full Hamiltonian and the dressed ladder operators
//   X_o^+ = sum_{j>k} <k|(o + o^+)|j> |k><j|,   X_o^- = (X_o^+)^+.

#include <cmc/fock.hpp>

#include <array>
#include <vector>

namespace cmc {

// Two eigenvalues closer than this (units of omega_b) are treated as tied.
inline constexpr double kDegeneracyTol = 1e-12;

struct DressedBasis {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // column j is |j> in the bare Fock basis
  ModeDims dims;
  // Symmetry sector of each eigenstate. When the Hamiltonian conserves the
  // photon-number parities of both cavities, sector = 2 * (n_a mod 2) + (n_c mod 2);
  // otherwise every state is in sector 0.
  std::vector<int> sector;
  int sector_count = 1;
};

// Sorted spectral decomposition. Exactly degenerate states are canonicalised
// (Gram-Schmidt of the bare kets in flattened order projected on the
// eigenspace) and ordered by the flattened index of their largest bare
// component; each eigenvector is phased so that component is real positive.
DressedBasis diagonalize(const Operator& h);

struct DressedOperatorSet {
  // Indexed by Mode: [a, b, c]. Both in the bare Fock basis.
  std::array<Operator, 3> x_plus;
  std::array<Operator, 3> x_minus;
  // X_o^+ expressed in the eigenbasis (strictly upper triangular).
  std::array<Matrix, 3> x_plus_eigen;

  const Operator& plus(Mode m) const { return x_plus[static_cast<std::size_t>(m)]; }
  const Operator& minus(Mode m) const { return x_minus[static_cast<std::size_t>(m)]; }
};

// X_o^+ in the bare basis and in the eigenbasis.
Operator dressed_lowering(const DressedBasis& basis, Mode mode);
Matrix dressed_lowering_eigen(const DressedBasis& basis, Mode mode);
DressedOperatorSet dressed_operators(const DressedBasis& basis);

// <X^- X^+>; throws NotNormalized when |norm - 1| > 1e-6 (trace for rho).
double dressed_occupation(const StateVector& psi, const DressedOperatorSet& ops, Mode mode);
double dressed_occupation(const DensityMatrix& rho, const DressedOperatorSet& ops, Mode mode);

}  // namespace cmc

#endif
