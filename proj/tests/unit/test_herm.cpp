#include <doctest.h>

#include "oracles.hpp"
#include "tdhfc/errors.hpp"
#include "tdhfc/herm.hpp"

using namespace tdhfc;

namespace {

const cplx I{0.0, 1.0};

CMatrix m2(cplx a, cplx b, cplx c, cplx d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("basis for n=2 is the four standard generators in order") {
  const HermBasis b = build_basis(2);
  REQUIRE(b.elements.size() == 4);
  CHECK(b.elements[0] == m2(1, 0, 0, 0));
  CHECK(b.elements[1] == m2(0, 1, 1, 0));
  CHECK(b.elements[2] == m2(0, 0, 0, 1));
  CHECK(b.elements[3] == m2(0, I, -I, 0));
}

TEST_CASE("basis for n=1 is [1]") {
  const HermBasis b = build_basis(1);
  REQUIRE(b.elements.size() == 1);
  CHECK(b.elements[0](0, 0) == cplx(1.0));
}

TEST_CASE("basis for n=3 has 6 real and 3 imaginary generators, all Hermitian, full rank") {
  const HermBasis b = build_basis(3);
  REQUIRE(b.elements.size() == 9);
  int real = 0;
  for (const auto& e : b.elements) {
    CHECK((e - e.adjoint()).norm() == 0.0);
    if (e.imag().norm() == 0.0) ++real;
  }
  CHECK(real == 6);
  Eigen::FullPivLU<CMatrix> lu(b.R);
  CHECK(lu.rank() == 9);
}

TEST_CASE("R * Rinv is the identity") {
  for (int n : {1, 2, 3, 6}) {
    const HermBasis b = build_basis(n);
    CHECK((b.R * b.Rinv - CMatrix::Identity(n * n, n * n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("build_basis rejects n < 1") { CHECK_THROWS_AS(build_basis(0), DimensionMismatch); }

TEST_CASE("vec is row-major") {
  const CVector v = vec(m2(1, 2, 3, 4));
  CHECK(v(0) == cplx(1));
  CHECK(v(1) == cplx(2));
  CHECK(v(2) == cplx(3));
  CHECK(v(3) == cplx(4));
  const CVector e = vec(CMatrix::Identity(2, 2));
  CHECK(e == (CVector(4) << 1, 0, 0, 1).finished());
}

TEST_CASE("unvec examples") {
  const HermBasis b = build_basis(2);
  const double d[] = {0.0, 1.0};
  CHECK(unvec(HermMatrix::diagonal(d), b).isApprox((RVector(4) << 0, 0, 1, 0).finished()));
  const RVector p = unvec(HermMatrix(m2(0, I, -I, 0)), b);
  CHECK((p - (RVector(4) << 0, 0, 0, 1).finished()).norm() < 1e-15);
}

TEST_CASE("reconstruct examples") {
  const HermBasis b = build_basis(2);
  CHECK(reconstruct((RVector(4) << 0, 0, 1, 0).finished(), b).matrix() == m2(0, 0, 0, 1));
  CHECK(reconstruct((RVector(4) << 1, 1, 1, 0).finished(), b).matrix() == m2(1, 1, 1, 1));
  CHECK_THROWS_AS(reconstruct(RVector::Zero(3), b), DimensionMismatch);
}

TEST_CASE("unvec/reconstruct round trips") {
  Xoshiro256 rng(11);
  for (int n : {1, 2, 4, 6}) {
    const HermBasis b = build_basis(n);
    for (int t = 0; t < 20; ++t) {
      const HermMatrix P = oracle::random_hermitian(rng, n);
      CHECK((reconstruct(unvec(P, b), b).matrix() - P.matrix()).cwiseAbs().maxCoeff() < 1e-12);
      const RVector p = oracle::random_vector(rng, n * n);
      CHECK((unvec(reconstruct(p, b), b) - p).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("unvec reports an imaginary residue from a corrupted basis") {
  HermBasis b = build_basis(2);
  b.Rinv *= I;
  const double d[] = {1.0, 0.0};
  CHECK_THROWS_AS(unvec(HermMatrix::diagonal(d), b), ImagResidue);
  CHECK_THROWS_AS(unvec(HermMatrix::zero(3), build_basis(2)), DimensionMismatch);
}

TEST_CASE("HermMatrix symmetrizes on construction") {
  const HermMatrix h(m2(1, 2, 0, cplx(3, 5)));
  CHECK(h(0, 1) == cplx(1));
  CHECK(h(1, 0) == cplx(1));
  CHECK(h(1, 1) == cplx(3));
  CHECK_THROWS_AS(HermMatrix(CMatrix(2, 3)), DimensionMismatch);
}

TEST_CASE("frobenius_ip examples") {
  CHECK(frobenius_ip(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)) == cplx(2));
  CHECK(frobenius_ip(m2(0, 1, 0, 0), m2(0, 0, 1, 0)) == cplx(0));
  Xoshiro256 rng(3);
  const CMatrix A = oracle::random_matrix(rng, 4);
  const cplx aa = frobenius_ip(A, A);
  CHECK(aa.imag() == doctest::Approx(0.0));
  CHECK(aa.real() == doctest::Approx(A.cwiseAbs2().sum()).epsilon(1e-14));
  CHECK_THROWS_AS(frobenius_ip(CMatrix(2, 2), CMatrix(3, 3)), DimensionMismatch);
}

TEST_CASE("contractions agree with explicit loops") {
  Xoshiro256 rng(5);
  for (int n : {1, 2, 3}) {
    const Tensor4 xi = oracle::random_tensor(rng, n);
    const CMatrix A = oracle::random_matrix(rng, n);
    CHECK((contract_left(xi, A) - oracle::contract_left_loop(xi, A)).norm() < 1e-12);
    CHECK((contract_right(A, xi) - oracle::contract_right_loop(A, xi)).norm() < 1e-12);
    CHECK((contract_right_conj(A, xi) - oracle::contract_right_loop(A, xi.conjugate())).norm() < 1e-12);
  }
}

TEST_CASE("identity and zero tensors") {
  Xoshiro256 rng(6);
  const CMatrix A = oracle::random_matrix(rng, 3);
  CHECK((contract_left(Tensor4::identity(3), A) - A).norm() == 0.0);
  CHECK((contract_right(A, Tensor4::identity(3)) - A).norm() == 0.0);
  CHECK(contract_left(Tensor4(3), A).norm() == 0.0);
  CHECK_THROWS_AS(contract_left(Tensor4(2), A), DimensionMismatch);
}

TEST_CASE("compose matches the loop definition") {
  Xoshiro256 rng(8);
  const int n = 2;
  const Tensor4 a = oracle::random_tensor(rng, n);
  const Tensor4 b = oracle::random_tensor(rng, n);
  const Tensor4 c = compose(a, b);
  double err = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          cplx sum = 0.0;
          for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) sum += a(p, q, j, l) * b(j, l, r, s);
          err = std::max(err, std::abs(sum - c(p, q, r, s)));
        }
  CHECK(err < 1e-13);
  CHECK_THROWS_AS(compose(Tensor4(2), Tensor4(3)), DimensionMismatch);
}

TEST_CASE("Re<X, Y> = 0 over a full set of probes forces X = 0") {
  // Probes E_kl and i E_kl recover Re X_kl and Im X_kl.
  Xoshiro256 rng(9);
  const int n = 3;
  const CMatrix X = oracle::random_matrix(rng, n);
  CMatrix rebuilt = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      CMatrix E = CMatrix::Zero(n, n);
      E(k, l) = 1.0;
      rebuilt(k, l) = cplx(frobenius_ip(X, E).real(), frobenius_ip(X, I * E).real());
    }
  CHECK((rebuilt - X).norm() < 1e-14);
}
