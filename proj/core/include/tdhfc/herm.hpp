#pragma once

// Complex matrix primitives: Hermitian matrices, the real representation
// p <-> P of Hermitian matrices, the Frobenius inner product and the
// double-index contractions of 4-index tensors.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tdhfc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Complex Hermitian matrix. Construction symmetrizes the input,
/// P <- (P + P^dagger) / 2, so the stored entries satisfy
/// P(q, r) == conj(P(r, q)) exactly.
class HermMatrix {
 public:
  HermMatrix() = default;
  explicit HermMatrix(const CMatrix& m);
  explicit HermMatrix(const RMatrix& m);

  static HermMatrix zero(int n);
  static HermMatrix diagonal(std::span<const double> d);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }
  cplx operator()(int q, int r) const { return m_(q, r); }

 private:
  CMatrix m_;
};

/// Dense 4-index complex tensor xi(a, b, r, s) with every index of size n.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, cplx{0.0, 0.0}) {}

  static Tensor4 identity(int n);

  int dim() const noexcept { return n_; }
  cplx& operator()(int a, int b, int r, int s) { return data_[index(a, b, r, s)]; }
  cplx operator()(int a, int b, int r, int s) const { return data_[index(a, b, r, s)]; }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  Tensor4 conjugate() const;
  Tensor4& operator+=(const Tensor4& other);
  double max_abs() const;

 private:
  std::size_t index(int a, int b, int r, int s) const noexcept {
    return ((static_cast<std::size_t>(a) * n_ + b) * n_ + r) * n_ + s;
  }

  int n_ = 0;
  std::vector<cplx> data_;
};

/// Basis of the real vector space of n x n Hermitian matrices. Ordering:
/// the n(n+1)/2 real-part generators in row-major upper-triangular order
/// (diagonal included), then the n(n-1)/2 imaginary-part generators
/// (i at (q,r), -i at (r,q), q < r) in the same order.
/// R(q*n + r, m) = elements[m](q, r), so vec(P) = R p.
struct HermBasis {
  int n = 0;
  std::vector<CMatrix> elements;
  CMatrix R;
  CMatrix Rinv;
};

HermBasis build_basis(int n);

/// Row-major vectorization: vec(P)[i*n + j] = P(i, j).
CVector vec(const CMatrix& P);

/// Real coordinates of a Hermitian matrix in the basis. Throws ImagResidue
/// when the discarded imaginary part exceeds 1e-10.
RVector unvec(const HermMatrix& P, const HermBasis& basis);

HermMatrix reconstruct(const RVector& p, const HermBasis& basis);

/// <A, B> = tr(A^dagger B).
cplx frobenius_ip(const CMatrix& A, const CMatrix& B);

/// (xi : A)_{ij} = sum_{kl} xi_{ijkl} A_{kl}
CMatrix contract_left(const Tensor4& xi, const CMatrix& A);
/// (A : xi)_{ij} = sum_{kl} A_{kl} xi_{klij}
CMatrix contract_right(const CMatrix& A, const Tensor4& xi);

/// (A : conj(xi)) without materializing the conjugated tensor.
CMatrix contract_right_conj(const CMatrix& A, const Tensor4& xi);

/// Tensor composition (xi o eta)_{abrs} = sum_{jl} xi_{abjl} eta_{jlrs}.
Tensor4 compose(const Tensor4& xi, const Tensor4& eta);

inline CMatrix commutator(const CMatrix& A, const CMatrix& B) { return A * B - B * A; }

}  // namespace tdhfc
