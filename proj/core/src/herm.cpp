#include "tdhfc/herm.hpp"

#include <cmath>

#include "tdhfc/errors.hpp"

namespace tdhfc {

HermMatrix::HermMatrix(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch("HermMatrix: expected a non-empty square matrix");
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermMatrix::HermMatrix(const RMatrix& m) : HermMatrix(CMatrix(m.cast<cplx>())) {}

HermMatrix HermMatrix::zero(int n) { return HermMatrix(CMatrix(CMatrix::Zero(n, n))); }

HermMatrix HermMatrix::diagonal(std::span<const double> d) {
  const int n = static_cast<int>(d.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[i];
  return HermMatrix(m);
}

Tensor4 Tensor4::identity(int n) {
  Tensor4 t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(i, j, i, j) = 1.0;
  return t;
}

Tensor4 Tensor4::conjugate() const {
  Tensor4 t = *this;
  for (auto& z : t.data_) z = std::conj(z);
  return t;
}

Tensor4& Tensor4::operator+=(const Tensor4& other) {
  if (other.n_ != n_) throw DimensionMismatch("Tensor4 +=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

HermBasis build_basis(int n) {
  if (n < 1) throw DimensionMismatch("build_basis: n must be >= 1");
  HermBasis b;
  b.n = n;
  const cplx I{0.0, 1.0};
  for (int q = 0; q < n; ++q) {
    for (int r = q; r < n; ++r) {
      CMatrix m = CMatrix::Zero(n, n);
      m(q, r) = 1.0;
      m(r, q) = 1.0;
      b.elements.push_back(std::move(m));
    }
  }
  for (int q = 0; q < n; ++q) {
    for (int r = q + 1; r < n; ++r) {
      CMatrix m = CMatrix::Zero(n, n);
      m(q, r) = I;
      m(r, q) = -I;
      b.elements.push_back(std::move(m));
    }
  }
  const int n2 = n * n;
  b.R = CMatrix::Zero(n2, n2);
  for (int m = 0; m < n2; ++m)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r) b.R(q * n + r, m) = b.elements[m](q, r);
  b.Rinv = b.R.fullPivLu().inverse();
  return b;
}

CVector vec(const CMatrix& P) {
  const auto rows = P.rows();
  const auto cols = P.cols();
  CVector v(rows * cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) v(i * cols + j) = P(i, j);
  return v;
}

RVector unvec(const HermMatrix& P, const HermBasis& basis) {
  if (P.dim() != basis.n) throw DimensionMismatch("unvec: matrix and basis dimensions differ");
  const CVector c = basis.Rinv * vec(P.matrix());
  const double residue = c.imag().cwiseAbs().maxCoeff();
  if (residue > 1e-10) {
    throw ImagResidue("unvec: imaginary residue " + std::to_string(residue) + " exceeds 1e-10");
  }
  return c.real();
}

HermMatrix reconstruct(const RVector& p, const HermBasis& basis) {
  const int n = basis.n;
  if (p.size() != n * n) throw DimensionMismatch("reconstruct: length(p) != n^2");
  const CVector v = basis.R * p.cast<cplx>();
  CMatrix P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) = v(i * n + j);
  return HermMatrix(P);
}

cplx frobenius_ip(const CMatrix& A, const CMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw DimensionMismatch("frobenius_ip: operand shapes differ");
  }
  // tr(A^dagger B) = sum_ij conj(A_ij) B_ij
  return (A.conjugate().cwiseProduct(B)).sum();
}

namespace {

void check_square(const Tensor4& xi, const CMatrix& A, const char* who) {
  if (A.rows() != xi.dim() || A.cols() != xi.dim()) {
    throw DimensionMismatch(std::string(who) + ": tensor and matrix dimensions differ");
  }
}

}  // namespace

CMatrix contract_left(const Tensor4& xi, const CMatrix& A) {
  check_square(xi, A, "contract_left");
  const int n = xi.dim();
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const auto d = xi.data();
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx* row = d.data() + (static_cast<std::size_t>(i) * n + j) * n2;
      cplx acc{0.0, 0.0};
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) acc += row[k * n + l] * A(k, l);
      out(i, j) = acc;
    }
  }
  return out;
}

CMatrix contract_right(const CMatrix& A, const Tensor4& xi) {
  check_square(xi, A, "contract_right");
  const int n = xi.dim();
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const auto d = xi.data();
  CMatrix out = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const cplx akl = A(k, l);
      if (akl == cplx{0.0, 0.0}) continue;
      const cplx* slab = d.data() + (static_cast<std::size_t>(k) * n + l) * n2;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) += akl * slab[i * n + j];
    }
  }
  return out;
}

CMatrix contract_right_conj(const CMatrix& A, const Tensor4& xi) {
  check_square(xi, A, "contract_right_conj");
  const int n = xi.dim();
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const auto d = xi.data();
  CMatrix out = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const cplx akl = A(k, l);
      if (akl == cplx{0.0, 0.0}) continue;
      const cplx* slab = d.data() + (static_cast<std::size_t>(k) * n + l) * n2;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) += akl * std::conj(slab[i * n + j]);
    }
  }
  return out;
}

Tensor4 compose(const Tensor4& xi, const Tensor4& eta) {
  if (xi.dim() != eta.dim()) throw DimensionMismatch("compose: tensor dimensions differ");
  const int n = xi.dim();
  const int n2 = n * n;
  // Viewed as n^2 x n^2 matrices this is an ordinary matrix product.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      xi.data().data(), n2, n2);
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> b(
      eta.data().data(), n2, n2);
  Tensor4 out(n);
  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
      out.data().data(), n2, n2);
  c.noalias() = a * b;
  return out;
}

}  // namespace tdhfc
