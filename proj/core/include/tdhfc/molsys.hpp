#pragma once

// Molecular data ingestion and the closed-shell TDHF Hamiltonian
//
//   H(P) = H0(P) + sum_{j in active} a_j M_j
//
// in the canonically orthogonalized (CO) basis.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tdhfc/herm.hpp"

namespace tdhfc {

/// Molecular data as read from an interchange file (AO basis, atomic units).
struct MolSystemRaw {
  std::string name;
  int n_basis = 0;
  int n_electrons = 0;
  RMatrix overlap;
  RMatrix hcore;
  std::array<RMatrix, 3> dipole;
  /// Chemist-notation (pq|rs) at ((p*N + q)*N + r)*N + s.
  std::vector<double> eri;

  double eri_at(int p, int q, int r, int s) const {
    const std::size_t n = static_cast<std::size_t>(n_basis);
    return eri[((p * n + q) * n + r) * n + s];
  }
};

/// Parses and validates an interchange JSON document. Throws ParseError for
/// malformed input and InvariantViolation (naming the check) for data that
/// parses but is physically inconsistent.
MolSystemRaw parse_system(const std::string& json_text);
MolSystemRaw load_system(const std::filesystem::path& path);

/// Checks every MolSystemRaw invariant; throws InvariantViolation.
void validate(const MolSystemRaw& raw);

struct MolSystem {
  MolSystemRaw raw;
  RMatrix X;
  RMatrix hcore_co;
  std::array<RMatrix, 3> dipoles_co;
  std::vector<int> active;
  /// Two-electron integrals transformed to the CO basis.
  std::vector<double> eri_co;
  /// dH0_{jl} / dP_{rs}; constant because H0 is affine in P.
  Tensor4 dH0_dP;

  int n() const noexcept { return raw.n_basis; }
  int n_active() const noexcept { return static_cast<int>(active.size()); }
  double occupied() const noexcept { return 0.5 * raw.n_electrons; }
  const RMatrix& active_dipole(int j) const { return dipoles_co[active.at(j)]; }
};

/// Canonical orthogonalization X = U s^{-1/2}, eigenvalues ascending, each
/// column of U signed so its largest-magnitude entry is positive. Throws
/// NearSingularOverlap when the smallest overlap eigenvalue is below 1e-8.
MolSystem orthogonalize(const MolSystemRaw& raw);

/// Two-electron part G(P) in the CO basis, complex-linear in P:
/// G_pq = sum_rs P_rs [2 (pq|sr) - (pr|qs)].
CMatrix two_electron(const MolSystem& sys, const CMatrix& P);

/// Field-free Hamiltonian H0(P) = hcore_co + G(P).
HermMatrix fock(const MolSystem& sys, const HermMatrix& P);

/// sum_{j in active} a_j M_j
HermMatrix external_potential(const MolSystem& sys, const RVector& a);

HermMatrix hamiltonian(const MolSystem& sys, const HermMatrix& P, const RVector& a);

struct GroundState {
  HermMatrix P;
  double energy = 0.0;  // electronic energy, nuclear repulsion excluded
  int iterations = 0;
};

/// Closed-shell SCF by repeated diagonalization with Aufbau filling; stops
/// when ||[H0(P), P]||_F < 1e-8. Throws NoConvergence after 500 iterations.
GroundState ground_state(const MolSystem& sys);

}  // namespace tdhfc
