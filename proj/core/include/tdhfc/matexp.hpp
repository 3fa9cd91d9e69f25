#pragma once

// Matrix exponential exp(c H) for Hermitian H and purely imaginary c, with
// its Frechet derivative and full Jacobian tensor.
//
// With H = V diag(h) V^dagger and mu = c h, exp(cH) = V diag(e^mu) V^dagger
// and the derivative along a direction E is
//
//   D exp(Z)[E] = V (Gamma o (V^dagger E V)) V^dagger,
//   Gamma_ij = (e^{mu_i} - e^{mu_j}) / (mu_i - mu_j),   Gamma_ii = e^{mu_i}
//
// (Daleckii-Krein). Nearly equal eigenvalues fall back to the first-order
// limit when |mu_i - mu_j| < 1e-10.

#include "tdhfc/herm.hpp"

namespace tdhfc {

/// exp(c H) for Hermitian H and purely imaginary c. The result is unitary.
CMatrix expm_antihermitian(const HermMatrix& H, cplx c);

/// Spectral factorization of Z = c H kept around so the derivative and its
/// adjoint can be applied to many directions without rebuilding a tensor.
class SpectralExp {
 public:
  SpectralExp(const HermMatrix& H, cplx c);

  const CMatrix& value() const noexcept { return value_; }
  cplx scale() const noexcept { return c_; }

  /// D exp(Z)[E], complex-linear in E.
  CMatrix frechet(const CMatrix& E) const;
  /// Adjoint map under the Frobenius inner product:
  /// <A, D exp(Z)[E]> = <frechet_adjoint(A), E>. Equals A : conj(jac).
  CMatrix frechet_adjoint(const CMatrix& A) const;
  /// jac(a, b, j, l) = d(exp Z)_{ab} / dZ_{jl}.
  Tensor4 jacobian() const;

 private:
  cplx c_;
  CMatrix V_;
  CMatrix gamma_;
  CMatrix value_;
};

struct ExpJacobian {
  CMatrix value;
  Tensor4 jac;
};

ExpJacobian expm_with_jacobian(const HermMatrix& H, cplx c);

/// Jacobian of exp(Z^dagger) given the one of exp(Z):
/// value' = value^dagger, jac'(a, b, j, l) = conj(jac(b, a, l, j)).
ExpJacobian conjugate_jacobian(const ExpJacobian& j);

}  // namespace tdhfc
