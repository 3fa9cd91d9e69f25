#include "tdhfc/matexp.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "tdhfc/errors.hpp"

namespace tdhfc {

namespace {

constexpr double kDividedDifferenceCutoff = 1e-10;

void require_imaginary(cplx c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) ||
      std::abs(c.real()) > 1e-14 * std::max(1.0, std::abs(c.imag()))) {
    throw Error("matexp: scale factor must be purely imaginary");
  }
}

// e^z - 1 without cancellation for small |z|.
cplx expm1_complex(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  const double em1 = std::expm1(x);
  return {em1 * std::cos(y) - 2.0 * s * s, (em1 + 1.0) * std::sin(y)};
}

// (e^a - e^b) / (a - b)
cplx divided_difference(cplx a, cplx b) {
  const cplx d = a - b;
  const cplx eb = std::exp(b);
  if (std::abs(d) < kDividedDifferenceCutoff) return eb * (1.0 + 0.5 * d);
  return eb * expm1_complex(d) / d;
}

Eigen::SelfAdjointEigenSolver<CMatrix> diagonalize(const HermMatrix& H) {
  if (!H.matrix().allFinite()) throw EigenFailure("matexp: non-finite Hamiltonian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H.matrix());
  if (es.info() != Eigen::Success) throw EigenFailure("matexp: eigendecomposition failed");
  return es;
}

}  // namespace

CMatrix expm_antihermitian(const HermMatrix& H, cplx c) {
  require_imaginary(c);
  const auto es = diagonalize(H);
  const auto& V = es.eigenvectors();
  CVector e(V.cols());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::exp(c * es.eigenvalues()(i));
  return V * e.asDiagonal() * V.adjoint();
}

SpectralExp::SpectralExp(const HermMatrix& H, cplx c) : c_(c) {
  require_imaginary(c);
  const auto es = diagonalize(H);
  V_ = es.eigenvectors();
  const auto n = V_.cols();
  CVector mu(n);
  CVector e(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mu(i) = c * es.eigenvalues()(i);
    e(i) = std::exp(mu(i));
  }
  gamma_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gamma_(i, j) = i == j ? e(i) : divided_difference(mu(i), mu(j));
  value_ = V_ * e.asDiagonal() * V_.adjoint();
}

CMatrix SpectralExp::frechet(const CMatrix& E) const {
  const CMatrix inner = gamma_.cwiseProduct(V_.adjoint() * E * V_);
  return V_ * inner * V_.adjoint();
}

CMatrix SpectralExp::frechet_adjoint(const CMatrix& A) const {
  const CMatrix inner = gamma_.conjugate().cwiseProduct(V_.adjoint() * A * V_);
  return V_ * inner * V_.adjoint();
}

Tensor4 SpectralExp::jacobian() const {
  const int n = static_cast<int>(V_.rows());
  Tensor4 jac(n);
  CMatrix E = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      E(j, l) = 1.0;
      const CMatrix D = frechet(E);
      E(j, l) = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) jac(a, b, j, l) = D(a, b);
    }
  }
  return jac;
}

ExpJacobian expm_with_jacobian(const HermMatrix& H, cplx c) {
  const SpectralExp se(H, c);
  return {se.value(), se.jacobian()};
}

ExpJacobian conjugate_jacobian(const ExpJacobian& j) {
  const int n = j.jac.dim();
  ExpJacobian out{j.value.adjoint(), Tensor4(n)};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) out.jac(a, b, r, s) = std::conj(j.jac(b, a, s, r));
  return out;
}

}  // namespace tdhfc
