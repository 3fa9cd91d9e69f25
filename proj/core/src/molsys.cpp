#include "tdhfc/molsys.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "tdhfc/errors.hpp"

namespace tdhfc {

namespace {

using nlohmann::json;

RMatrix square_from(const json& doc, const char* key, int n) {
  if (!doc.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw ParseError(std::string("\"") + key + "\" must be an array");
  if (arr.size() != static_cast<std::size_t>(n) * n) {
    throw ParseError(std::string("\"") + key + "\" must hold n_basis^2 values");
  }
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& v = arr[static_cast<std::size_t>(i) * n + j];
      if (!v.is_number()) throw ParseError(std::string("\"") + key + "\" holds a non-number");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

void require_symmetric(const RMatrix& m, const char* what) {
  if (!m.allFinite()) throw InvariantViolation(std::string(what) + " has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvariantViolation(std::string(what) + " is not symmetric");
  }
}

RMatrix transform(const RMatrix& X, const RMatrix& O) { return X.transpose() * O * X; }

std::vector<double> transform_eri(const std::vector<double>& eri, const RMatrix& X, int n) {
  // Four quarter transformations, one index at a time.
  const std::size_t N = static_cast<std::size_t>(n);
  std::vector<double> a(eri), b(eri.size());
  auto idx = [N](std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return ((p * N + q) * N + r) * N + s;
  };
  for (int pass = 0; pass < 4; ++pass) {
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = 0; q < N; ++q)
        for (std::size_t r = 0; r < N; ++r)
          for (std::size_t s = 0; s < N; ++s) {
            // transform the leading index and rotate it to the back
            const double v = a[idx(p, q, r, s)];
            if (v == 0.0) continue;
            for (std::size_t t = 0; t < N; ++t) b[idx(q, r, s, t)] += X(p, t) * v;
          }
    std::swap(a, b);
  }
  return a;
}

}  // namespace

MolSystemRaw parse_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("interchange file: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("interchange file: top level must be an object");

  MolSystemRaw raw;
  try {
    raw.name = doc.at("name").get<std::string>();
    raw.n_basis = doc.at("n_basis").get<int>();
    raw.n_electrons = doc.at("n_electrons").get<int>();
    if (doc.at("units").get<std::string>() != "hartree_bohr") {
      throw ParseError("interchange file: \"units\" must be \"hartree_bohr\"");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("interchange file: ") + e.what());
  }
  const int n = raw.n_basis;
  if (n < 1) throw ParseError("interchange file: n_basis must be >= 1");

  raw.overlap = square_from(doc, "overlap", n);
  raw.hcore = square_from(doc, "hcore", n);
  raw.dipole[0] = square_from(doc, "dipole_x", n);
  raw.dipole[1] = square_from(doc, "dipole_y", n);
  raw.dipole[2] = square_from(doc, "dipole_z", n);

  if (!doc.contains("eri") || !doc.at("eri").is_array()) throw ParseError("missing array \"eri\"");
  const auto& eri = doc.at("eri");
  const std::size_t n4 = static_cast<std::size_t>(n) * n * n * n;
  if (eri.size() != n4) throw ParseError("\"eri\" must hold n_basis^4 values");
  raw.eri.resize(n4);
  for (std::size_t i = 0; i < n4; ++i) {
    if (!eri[i].is_number()) throw ParseError("\"eri\" holds a non-number");
    raw.eri[i] = eri[i].get<double>();
  }

  validate(raw);
  return raw;
}

MolSystemRaw load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

void validate(const MolSystemRaw& raw) {
  const int n = raw.n_basis;
  if (raw.n_electrons < 2 || raw.n_electrons % 2 != 0) {
    throw InvariantViolation("n_electrons must be even and positive (closed shell)");
  }
  if (raw.n_electrons / 2 > n) throw InvariantViolation("more occupied orbitals than basis functions");
  require_symmetric(raw.overlap, "overlap");
  require_symmetric(raw.hcore, "hcore");
  require_symmetric(raw.dipole[0], "dipole_x");
  require_symmetric(raw.dipole[1], "dipole_y");
  require_symmetric(raw.dipole[2], "dipole_z");

  Eigen::LLT<RMatrix> llt(raw.overlap);
  if (llt.info() != Eigen::Success) throw InvariantViolation("overlap is not positive definite");

  for (double v : raw.eri) {
    if (!std::isfinite(v)) throw InvariantViolation("eri has non-finite entries");
  }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double v = raw.eri_at(p, q, r, s);
          const double worst = std::max({std::abs(v - raw.eri_at(q, p, r, s)),
                                         std::abs(v - raw.eri_at(p, q, s, r)),
                                         std::abs(v - raw.eri_at(r, s, p, q))});
          if (worst > 1e-10) {
            throw InvariantViolation("eri permutation symmetry broken at (" + std::to_string(p) + "," +
                                     std::to_string(q) + "|" + std::to_string(r) + "," +
                                     std::to_string(s) + ")");
          }
        }
}

MolSystem orthogonalize(const MolSystemRaw& raw) {
  const int n = raw.n_basis;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(raw.overlap);
  if (es.info() != Eigen::Success) throw EigenFailure("overlap eigendecomposition failed");
  const RVector& s = es.eigenvalues();
  if (s.minCoeff() < 1e-8) {
    throw NearSingularOverlap("overlap eigenvalue " + std::to_string(s.minCoeff()) + " below 1e-8");
  }
  RMatrix U = es.eigenvectors();
  // Within a (numerically) degenerate eigenvalue cluster the solver's vectors
  // are an arbitrary rotation. Replace them by Gram-Schmidt on the cluster
  // projector's columns taken in AO order, so X does not depend on the
  // eigensolver (p_x/p_y shells hit this).
  for (int c0 = 0; c0 < n;) {
    int c1 = c0 + 1;
    while (c1 < n && s[c1] - s[c0] < 1e-8 * std::max(1.0, s[c0])) ++c1;
    const int m = c1 - c0;
    if (m > 1) {
      const RMatrix Pc = U.middleCols(c0, m) * U.middleCols(c0, m).transpose();
      int found = 0;
      for (int i = 0; i < n && found < m; ++i) {
        RVector v = Pc.col(i);
        for (int k = 0; k < found; ++k) v -= U.col(c0 + k).dot(v) * U.col(c0 + k);
        if (v.norm() < 1e-6) continue;
        U.col(c0 + found++) = v.normalized();
      }
    }
    c0 = c1;
  }
  for (int c = 0; c < n; ++c) {
    Eigen::Index imax = 0;
    U.col(c).cwiseAbs().maxCoeff(&imax);
    if (U(imax, c) < 0.0) U.col(c) *= -1.0;
  }

  MolSystem sys;
  sys.raw = raw;
  sys.X = U * s.cwiseInverse().cwiseSqrt().asDiagonal();
  sys.hcore_co = transform(sys.X, raw.hcore);
  for (int j = 0; j < 3; ++j) {
    sys.dipoles_co[j] = transform(sys.X, raw.dipole[j]);
    if (sys.dipoles_co[j].norm() > 1e-10) sys.active.push_back(j);
  }
  sys.eri_co = transform_eri(raw.eri, sys.X, n);

  sys.dH0_dP = Tensor4(n);
  const std::size_t N = static_cast<std::size_t>(n);
  auto eri = [&](int p, int q, int r, int s) { return sys.eri_co[((p * N + q) * N + r) * N + s]; };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) sys.dH0_dP(p, q, r, s) = 2.0 * eri(p, q, s, r) - eri(p, r, q, s);
  return sys;
}

CMatrix two_electron(const MolSystem& sys, const CMatrix& P) {
  if (P.rows() != sys.n() || P.cols() != sys.n()) throw DimensionMismatch("two_electron: wrong density size");
  return contract_left(sys.dH0_dP, P);
}

HermMatrix fock(const MolSystem& sys, const HermMatrix& P) {
  return HermMatrix(CMatrix(sys.hcore_co.cast<cplx>() + two_electron(sys, P.matrix())));
}

HermMatrix external_potential(const MolSystem& sys, const RVector& a) {
  if (a.size() != sys.n_active()) throw DimensionMismatch("amplitude length differs from active dipole count");
  RMatrix v = RMatrix::Zero(sys.n(), sys.n());
  for (int j = 0; j < sys.n_active(); ++j) v += a(j) * sys.active_dipole(j);
  return HermMatrix(v);
}

HermMatrix hamiltonian(const MolSystem& sys, const HermMatrix& P, const RVector& a) {
  const HermMatrix v = external_potential(sys, a);
  return HermMatrix(CMatrix(fock(sys, P).matrix() + v.matrix()));
}

GroundState ground_state(const MolSystem& sys) {
  const int n = sys.n();
  const int nocc = sys.raw.n_electrons / 2;
  HermMatrix P = HermMatrix::zero(n);
  for (int it = 1; it <= 500; ++it) {
    const HermMatrix F = fock(sys, P);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(F.matrix());
    if (es.info() != Eigen::Success) throw EigenFailure("ground_state: Fock diagonalization failed");
    const auto C = es.eigenvectors().leftCols(nocc);
    P = HermMatrix(CMatrix(C * C.adjoint()));
    const HermMatrix F1 = fock(sys, P);
    if (commutator(F1.matrix(), P.matrix()).norm() < 1e-8) {
      const cplx e = (P.matrix() * (sys.hcore_co.cast<cplx>() + F1.matrix())).trace();
      return {P, e.real(), it};
    }
  }
  throw NoConvergence("ground_state: SCF did not converge in 500 iterations");
}

}  // namespace tdhfc
