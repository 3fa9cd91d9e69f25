#include <doctest.h>

#include "oracles.hpp"
#include "tdhfc/errors.hpp"
#include "tdhfc/matexp.hpp"

using namespace tdhfc;

namespace {

const cplx I{0.0, 1.0};

double unitarity(const CMatrix& U) {
  return (U.adjoint() * U - CMatrix::Identity(U.rows(), U.cols())).norm();
}

// max over directions of the Frechet error against central differences of
// the Taylor oracle, relative to ||jac:E||.
double frechet_rel_error(const HermMatrix& H, cplx c, Xoshiro256& rng, int directions, double eps) {
  const Tensor4 jac = expm_with_jacobian(H, c).jac;
  const int n = H.dim();
  double worst = 0.0;
  for (int t = 0; t < directions; ++t) {
    const CMatrix E = oracle::random_hermitian(rng, n).matrix();
    const CMatrix analytic = contract_left(jac, c * E);
    const CMatrix fd = oracle::fd_direction(oracle::expm_taylor, c * H.matrix(), c * E, eps);
    worst = std::max(worst, (analytic - fd).norm() / analytic.norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("exp of zero is the identity") {
  CHECK((expm_antihermitian(HermMatrix::zero(3), -I) - CMatrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("diagonal generator") {
  const double h[] = {0.7, -1.3};
  const double dt = 8.268e-3;
  const CMatrix U = expm_antihermitian(HermMatrix::diagonal(h), -I * dt);
  CHECK(std::abs(U(0, 0) - std::exp(-I * dt * h[0])) < 1e-15);
  CHECK(std::abs(U(1, 1) - std::exp(-I * dt * h[1])) < 1e-15);
  CHECK(std::abs(U(0, 1)) == 0.0);
}

TEST_CASE("random 6x6 exponentials are unitary and invert") {
  Xoshiro256 rng(21);
  for (int t = 0; t < 10; ++t) {
    const HermMatrix H = oracle::random_hermitian(rng, 6, 3.0);
    const CMatrix U = expm_antihermitian(H, -2.0 * I * 0.3);
    CHECK(unitarity(U) < 1e-12 * 6);
    const CMatrix V = expm_antihermitian(H, 2.0 * I * 0.3);
    CHECK((U * V - CMatrix::Identity(6, 6)).norm() < 1e-12 * 6);
    CHECK((U - oracle::expm_taylor(-2.0 * I * 0.3 * H.matrix())).norm() < 1e-12);
  }
}

TEST_CASE("real part in the scale factor is rejected") {
  CHECK_THROWS_AS(expm_antihermitian(HermMatrix::zero(2), cplx(1.0, 1.0)), Error);
}

TEST_CASE("non-finite generator surfaces as an error") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(expm_antihermitian(HermMatrix(m), -I), EigenFailure);
}

TEST_CASE("jacobian at Z = 0 is the identity tensor") {
  const ExpJacobian j = expm_with_jacobian(HermMatrix::zero(2), -I);
  CHECK((j.value - CMatrix::Identity(2, 2)).norm() == 0.0);
  double err = 0.0;
  const Tensor4 id = Tensor4::identity(2);
  for (std::size_t i = 0; i < id.data().size(); ++i) err = std::max(err, std::abs(id.data()[i] - j.jac.data()[i]));
  CHECK(err < 1e-15);
}

TEST_CASE("diagonal generator: divided differences") {
  const double h[] = {0.4, -0.9};
  const cplx c = -I * 0.5;
  const ExpJacobian j = expm_with_jacobian(HermMatrix::diagonal(h), c);
  const cplx z1 = c * h[0], z2 = c * h[1];
  CHECK(std::abs(j.jac(0, 0, 0, 0) - std::exp(z1)) < 1e-15);
  CHECK(std::abs(j.jac(1, 1, 1, 1) - std::exp(z2)) < 1e-15);
  CHECK(std::abs(j.jac(0, 1, 0, 1) - (std::exp(z1) - std::exp(z2)) / (z1 - z2)) < 1e-15);
  CHECK(std::abs(j.jac(0, 0, 1, 1)) < 1e-15);
  CHECK(std::abs(j.jac(0, 1, 1, 0)) < 1e-15);

  // each entry against a central difference of the Taylor oracle
  const CMatrix Z = c * HermMatrix::diagonal(h).matrix();
  double err = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CMatrix E = CMatrix::Zero(2, 2);
      E(a, b) = 1.0;
      const CMatrix fd = oracle::fd_direction(oracle::expm_taylor, Z, E, 1e-6);
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) err = std::max(err, std::abs(fd(p, q) - j.jac(p, q, a, b)));
    }
  CHECK(err < 1e-9);
}

TEST_CASE("jacobian matches finite differences at MMUT step sizes") {
  Xoshiro256 rng(22);
  const HermMatrix H = oracle::random_hermitian(rng, 2);
  const cplx c = -2.0 * I * 8.268e-3;
  const Tensor4 jac = expm_with_jacobian(H, c).jac;
  for (int t = 0; t < 10; ++t) {
    const CMatrix E = oracle::random_hermitian(rng, 2).matrix();
    const CMatrix fd = oracle::fd_direction(oracle::expm_taylor, c * H.matrix(), E, 1e-5);
    CHECK((contract_left(jac, E) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("Frechet consistency at n = 2 and n = 6") {
  Xoshiro256 rng(23);
  for (int n : {2, 6}) {
    const HermMatrix H = oracle::random_hermitian(rng, n);
    CHECK(frechet_rel_error(H, -I, rng, 5, 1e-5) < 1e-6);
  }
}

TEST_CASE("degenerate spectrum uses the equal-eigenvalue limit") {
  Xoshiro256 rng(24);
  CHECK(frechet_rel_error(HermMatrix(CMatrix(CMatrix::Identity(3, 3))), -I, rng, 5, 1e-5) < 1e-6);
  // nearly degenerate pair, separation below the cutoff
  const double h[] = {0.3, 0.3 + 1e-12, -0.5};
  CHECK(frechet_rel_error(HermMatrix::diagonal(h), -I, rng, 5, 1e-5) < 1e-6);
}

TEST_CASE("frechet and its adjoint agree with the tensor") {
  Xoshiro256 rng(25);
  const HermMatrix H = oracle::random_hermitian(rng, 4);
  const SpectralExp se(H, -I * 0.7);
  const Tensor4 jac = se.jacobian();
  const CMatrix E = oracle::random_matrix(rng, 4);
  const CMatrix A = oracle::random_matrix(rng, 4);
  CHECK((se.frechet(E) - contract_left(jac, E)).norm() < 1e-13);
  CHECK((se.frechet_adjoint(A) - contract_right_conj(A, jac)).norm() < 1e-13);
  // <A, D[E]> = <D*(A), E>
  CHECK(std::abs(frobenius_ip(A, se.frechet(E)) - frobenius_ip(se.frechet_adjoint(A), E)) < 1e-13);
}

TEST_CASE("conjugate_jacobian equals a recomputation with -c") {
  Xoshiro256 rng(26);
  for (int n : {2, 6}) {
    const HermMatrix H = oracle::random_hermitian(rng, n);
    const cplx c = -2.0 * I * 0.05;
    const ExpJacobian flipped = conjugate_jacobian(expm_with_jacobian(H, c));
    const ExpJacobian direct = expm_with_jacobian(H, -c);
    CHECK((flipped.value - direct.value).norm() < 1e-14);
    double err = 0.0;
    for (std::size_t i = 0; i < direct.jac.data().size(); ++i)
      err = std::max(err, std::abs(direct.jac.data()[i] - flipped.jac.data()[i]));
    CHECK(err < 1e-14);
  }
  const ExpJacobian z = expm_with_jacobian(HermMatrix::zero(2), -I);
  CHECK((conjugate_jacobian(z).value - z.value).norm() == 0.0);
}
