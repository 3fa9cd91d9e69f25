#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "tdhfc/errors.hpp"
#include "tdhfc/molsys.hpp"

using namespace tdhfc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json h2_doc() { return nlohmann::json::parse(slurp(oracle::data_file("h2_sto3g.json"))); }

// Minimal one-orbital system with a doubly occupied orbital.
MolSystemRaw toy_1x1(double s = 1.0) {
  MolSystemRaw r;
  r.name = "toy";
  r.n_basis = 1;
  r.n_electrons = 2;
  r.overlap = RMatrix::Constant(1, 1, s);
  r.hcore = RMatrix::Constant(1, 1, -1.0);
  for (auto& d : r.dipole) d = RMatrix::Zero(1, 1);
  r.dipole[2](0, 0) = 0.5;
  r.eri = {0.6};
  return r;
}

}  // namespace

TEST_CASE("bundled H2 loads with the textbook overlap") {
  const MolSystemRaw raw = load_system(oracle::data_file("h2_sto3g.json"));
  CHECK(raw.n_basis == 2);
  CHECK(raw.n_electrons == 2);
  CHECK(raw.overlap(0, 1) == doctest::Approx(0.6593).epsilon(1e-3));
  CHECK(std::abs(raw.overlap(0, 1) - 0.659) < 1e-3);
}

TEST_CASE("bundled systems: sizes and active dipoles") {
  const MolSystem h2 = oracle::bundled("h2_sto3g.json");
  const MolSystem hehp = oracle::bundled("hehp_sto3g.json");
  const MolSystem lih = oracle::bundled("lih_sto3g.json");
  CHECK(h2.active == std::vector<int>{2});
  CHECK(hehp.active == std::vector<int>{2});
  CHECK(lih.active == std::vector<int>{0, 1, 2});
  CHECK(lih.n() == 6);
  CHECK(lih.raw.n_electrons == 4);
  for (int j : {0, 1}) {
    CHECK(h2.dipoles_co[j].norm() < 1e-10);
    CHECK(hehp.dipoles_co[j].norm() < 1e-10);
  }
}

TEST_CASE("truncated file is a parse error") {
  const std::string text = slurp(oracle::data_file("h2_sto3g.json"));
  CHECK_THROWS_AS(parse_system(text.substr(0, text.size() / 2)), ParseError);
  CHECK_THROWS_AS(load_system("/nonexistent/h2.json"), ParseError);
}

TEST_CASE("format errors") {
  auto doc = h2_doc();
  doc["units"] = "angstrom";
  CHECK_THROWS_AS(parse_system(doc.dump()), ParseError);

  doc = h2_doc();
  doc.erase("dipole_y");
  CHECK_THROWS_AS(parse_system(doc.dump()), ParseError);

  doc = h2_doc();
  doc["eri"].erase(doc["eri"].begin());
  CHECK_THROWS_AS(parse_system(doc.dump()), ParseError);

  doc = h2_doc();
  doc["hcore"][1] = "x";
  CHECK_THROWS_AS(parse_system(doc.dump()), ParseError);

  doc = h2_doc();
  doc["extra_key"] = 42;
  CHECK_NOTHROW(parse_system(doc.dump()));
}

TEST_CASE("physically inconsistent data is an invariant violation") {
  auto doc = h2_doc();
  doc["eri"][1] = doc["eri"][1].get<double>() + 1e-6;  // (00|01) no longer equals (00|10)
  CHECK_THROWS_AS(parse_system(doc.dump()), InvariantViolation);

  doc = h2_doc();
  doc["n_electrons"] = 3;
  CHECK_THROWS_AS(parse_system(doc.dump()), InvariantViolation);

  doc = h2_doc();
  doc["overlap"] = {1.0, 2.0, 2.0, 1.0};
  CHECK_THROWS_AS(parse_system(doc.dump()), InvariantViolation);

  doc = h2_doc();
  doc["hcore"][1] = doc["hcore"][1].get<double>() + 1e-3;
  CHECK_THROWS_AS(parse_system(doc.dump()), InvariantViolation);
}

TEST_CASE("orthogonalize: trivial overlaps") {
  const MolSystem one = orthogonalize(toy_1x1(4.0));
  CHECK(one.X(0, 0) == doctest::Approx(0.5));

  MolSystemRaw r = load_system(oracle::data_file("h2_sto3g.json"));
  r.overlap = RMatrix::Identity(2, 2);
  const MolSystem s = orthogonalize(r);
  CHECK((s.X - RMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((s.hcore_co - r.hcore).norm() < 1e-14);
}

TEST_CASE("orthogonalize: X^T S X = I for the bundled data") {
  for (const char* f : {"h2_sto3g.json", "hehp_sto3g.json", "lih_sto3g.json"}) {
    const MolSystem s = oracle::bundled(f);
    const RMatrix res = s.X.transpose() * s.raw.overlap * s.X - RMatrix::Identity(s.n(), s.n());
    CHECK(res.norm() < 1e-10);
    // sign convention: largest-magnitude entry of each column is positive
    for (int j = 0; j < s.n(); ++j) {
      Eigen::Index i = 0;
      s.X.col(j).cwiseAbs().maxCoeff(&i);
      CHECK(s.X(i, j) > 0.0);
    }
  }
}

TEST_CASE("orthogonalize: degenerate overlap eigenvalues do not depend on the eigensolver") {
  // p_x and p_y of LiH share overlap eigenvalue 1 and couple to nothing else,
  // so their columns must be the AO unit vectors, not a rotation of them.
  const MolSystem s = oracle::bundled("lih_sto3g.json");
  int hits = 0;
  for (int j = 0; j < 6; ++j) {
    for (int ao : {2, 3}) {
      RVector e = RVector::Zero(6);
      e[ao] = 1.0;
      if ((s.X.col(j) - e).norm() < 1e-12) ++hits;
    }
  }
  CHECK(hits == 2);

  // S = I + 0.3 v v^T, v = (1,1,1)/sqrt(3): eigenvalue 1 is 2-fold on the
  // plane orthogonal to v; Gram-Schmidt of that projector's columns
  MolSystemRaw r = toy_1x1();
  r.n_basis = 3;
  r.overlap = RMatrix::Identity(3, 3) + RMatrix::Constant(3, 3, 0.1);
  r.hcore = RMatrix::Identity(3, 3);
  for (auto& d : r.dipole) d = RMatrix::Zero(3, 3);
  r.eri.assign(81, 0.0);
  const MolSystem a = orthogonalize(r);
  CHECK((a.X.transpose() * r.overlap * a.X - RMatrix::Identity(3, 3)).norm() < 1e-12);
  const RVector u1 = (RVector(3) << 2.0, -1.0, -1.0).finished() / std::sqrt(6.0);
  const RVector u2 = (RVector(3) << 0.0, 1.0, -1.0).finished() / std::sqrt(2.0);
  CHECK((a.X.col(0) - u1).norm() < 1e-12);
  CHECK((a.X.col(1) - u2).norm() < 1e-12);
}

TEST_CASE("orthogonalize rejects a nearly singular overlap") {
  MolSystemRaw r = load_system(oracle::data_file("h2_sto3g.json"));
  r.overlap << 1.0, 1.0 - 1e-9, 1.0 - 1e-9, 1.0;
  CHECK_THROWS_AS(orthogonalize(r), NearSingularOverlap);
}

TEST_CASE("fock basics") {
  const MolSystem s = oracle::bundled("lih_sto3g.json");
  const HermMatrix F0 = fock(s, HermMatrix::zero(6));
  CHECK((F0.matrix() - s.hcore_co.cast<cplx>()).norm() < 1e-14);

  Xoshiro256 rng(31);
  const RMatrix R = oracle::random_vector(rng, 36).reshaped(6, 6);
  const HermMatrix F = fock(s, HermMatrix(RMatrix(R + R.transpose())));
  CHECK(F.matrix().imag().norm() < 1e-14);

  const HermMatrix Pc = oracle::random_hermitian(rng, 6);
  const CMatrix Fc = fock(s, Pc).matrix();
  const CMatrix raw = s.hcore_co.cast<cplx>() + two_electron(s, Pc);
  CHECK((raw - raw.adjoint()).norm() < 1e-12);
  CHECK((Fc - raw).norm() < 1e-12);
}

TEST_CASE("two-electron part is linear") {
  const MolSystem s = oracle::bundled("lih_sto3g.json");
  Xoshiro256 rng(32);
  const HermMatrix P1 = oracle::random_hermitian(rng, 6);
  const HermMatrix P2 = oracle::random_hermitian(rng, 6);
  const double a = 0.37, b = -1.9;
  auto G = [&](const HermMatrix& P) { return CMatrix(fock(s, P).matrix() - s.hcore_co.cast<cplx>()); };
  const CMatrix lhs = G(HermMatrix(CMatrix(a * P1.matrix() + b * P2.matrix())));
  const CMatrix rhs = a * G(P1) + b * G(P2);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("fock matches an AO-basis build from the raw integrals") {
  // G in the AO basis with P_AO = X P X^T, then transformed back.
  const MolSystem s = oracle::bundled("lih_sto3g.json");
  Xoshiro256 rng(33);
  const HermMatrix P = oracle::random_hermitian(rng, 6);
  const int n = 6;
  const CMatrix X = s.X.cast<cplx>();
  const CMatrix Pao = X * P.matrix() * X.adjoint();
  CMatrix Gao = CMatrix::Zero(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t)
          Gao(p, q) += Pao(r, t) * (2.0 * s.raw.eri_at(p, q, t, r) - s.raw.eri_at(p, r, q, t));
  const CMatrix expect = X.adjoint() * (s.raw.hcore.cast<cplx>() + Gao) * X;
  CHECK((fock(s, P).matrix() - expect).norm() < 1e-12);
}

TEST_CASE("hamiltonian adds the active dipoles") {
  const MolSystem s = oracle::bundled("lih_sto3g.json");
  const HermMatrix P = HermMatrix::zero(6);
  CHECK((hamiltonian(s, P, RVector::Zero(3)).matrix() - fock(s, P).matrix()).norm() == 0.0);
  const RVector a = (RVector(3) << 0.1, -0.2, 0.3).finished();
  const CMatrix expect = fock(s, P).matrix() + (0.1 * s.dipoles_co[0] - 0.2 * s.dipoles_co[1] +
                                                0.3 * s.dipoles_co[2]).cast<cplx>();
  CHECK((hamiltonian(s, P, a).matrix() - expect).norm() < 1e-14);
  CHECK_THROWS_AS(hamiltonian(s, P, RVector::Zero(1)), DimensionMismatch);
  CHECK_THROWS_AS(fock(s, HermMatrix::zero(2)), DimensionMismatch);
}

TEST_CASE("ground state of a single orbital") {
  const MolSystem s = orthogonalize(toy_1x1());
  const GroundState g = ground_state(s);
  CHECK(g.P(0, 0) == cplx(1.0));
}

TEST_CASE("ground states: trace, idempotency, stationarity, reference energies") {
  struct Case {
    const char* file;
    double occupied;
    double energy;  // total RHF energy from an independent quantum chemistry code
  };
  for (const Case& c : {Case{"h2_sto3g.json", 1.0, -1.1167143251}, Case{"hehp_sto3g.json", 1.0, -2.8418364993},
                        Case{"lih_sto3g.json", 2.0, -7.8620092721}}) {
    const MolSystem s = oracle::bundled(c.file);
    const GroundState g = ground_state(s);
    const CMatrix& P = g.P.matrix();
    CHECK(P.trace().real() == doctest::Approx(c.occupied).epsilon(1e-12));
    CHECK((P * P - P).norm() < 1e-10);
    const CMatrix F = fock(s, g.P).matrix();
    CHECK((F * P - P * F).norm() < 1e-8);
    const double e_nuc =
        nlohmann::json::parse(slurp(oracle::data_file(c.file))).at("nuclear_repulsion").get<double>();
    CHECK(g.energy + e_nuc == doctest::Approx(c.energy).epsilon(1e-8));
  }
}
