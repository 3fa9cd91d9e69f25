#include "tdhfc/propagator.hpp"

#include <cmath>

#include "tdhfc/errors.hpp"
#include "tdhfc/matexp.hpp"

namespace tdhfc {

FeedbackModel::FeedbackModel(MolSystem sys, NetConfig net)
    : sys_(std::move(sys)), basis_(build_basis(sys_.n())), net_(std::move(net)) {
  net_.validate();
  if (net_.n_inputs() != sys_.n() * sys_.n()) {
    throw DimensionMismatch("network input width must equal N^2 = " + std::to_string(sys_.n() * sys_.n()));
  }
  if (net_.n_outputs() != sys_.n_active()) {
    throw DimensionMismatch("network output width must equal the active dipole count " +
                            std::to_string(sys_.n_active()));
  }
}

RVector FeedbackModel::amplitudes(const Theta& theta, const HermMatrix& P) const {
  return tdhfc::amplitudes(basis_, net_, theta, P);
}

HermMatrix FeedbackModel::hamiltonian(const Theta& theta, const HermMatrix& P) const {
  return tdhfc::hamiltonian(sys_, P, amplitudes(theta, P));
}

namespace {

StepResult advance(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk,
                   const HermMatrix& Pprev, double factor) {
  const RVector a = model.amplitudes(theta, Pk);
  const HermMatrix H = hamiltonian(model.system(), Pk, a);
  CMatrix U = expm_antihermitian(H, cplx{0.0, -factor});
  HermMatrix next(CMatrix(U * Pprev.matrix() * U.adjoint()));
  return {std::move(next), std::move(U), a};
}

double idempotency(const HermMatrix& P) { return (P.matrix() * P.matrix() - P.matrix()).norm(); }

}  // namespace

StepResult step_first(const FeedbackModel& model, const Theta& theta, const HermMatrix& P0, double dt) {
  return advance(model, theta, P0, P0, dt);
}

StepResult step_mmut(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk,
                     const HermMatrix& Pkm1, int k, double dt) {
  if (k < 1) throw Error("step_mmut: k must be >= 1");
  return advance(model, theta, Pk, Pkm1, 2.0 * dt);
}

Trajectory propagate(const FeedbackModel& model, const Theta& theta, const HermMatrix& P0, double dt, int K,
                     const InvariantTolerances& tol) {
  if (K < 1) throw Error("propagate: K must be >= 1");
  if (P0.dim() != model.n()) throw DimensionMismatch("propagate: initial state has the wrong size");
  Trajectory traj;
  traj.dt = dt;
  traj.K = K;
  traj.P.reserve(K + 1);
  traj.U.reserve(K);
  traj.a.reserve(K);
  traj.P.push_back(P0);
  traj.initial_idempotent = idempotency(P0) < 1e-8;
  const double trace0 = P0.matrix().trace().real();
  const int n = model.n();

  for (int k = 0; k < K; ++k) {
    StepResult step = k == 0 ? step_first(model, theta, P0, dt)
                             : step_mmut(model, theta, traj.P[k], traj.P[k - 1], k, dt);

    const double unit = (step.U.adjoint() * step.U - CMatrix::Identity(n, n)).norm();
    const double trace = std::abs(step.P_next.matrix().trace().real() - trace0);
    const double idem = idempotency(step.P_next);
    const double herm = (step.P_next.matrix() - step.P_next.matrix().adjoint()).norm();
    auto& st = traj.stats;
    st.max_unitarity = std::max(st.max_unitarity, unit);
    st.max_trace_drift = std::max(st.max_trace_drift, trace);
    st.max_hermiticity = std::max(st.max_hermiticity, herm);
    if (traj.initial_idempotent) st.max_idempotency = std::max(st.max_idempotency, idem);

    if (!std::isfinite(unit) || unit > 10.0 * tol.unitarity) {
      throw InvariantBreach(k, "unitarity defect " + std::to_string(unit));
    }
    if (!std::isfinite(trace) || trace > 10.0 * tol.trace) {
      throw InvariantBreach(k + 1, "trace drift " + std::to_string(trace));
    }
    if (traj.initial_idempotent && idem > 10.0 * tol.idempotency) {
      throw InvariantBreach(k + 1, "idempotency defect " + std::to_string(idem));
    }

    traj.U.push_back(std::move(step.U));
    traj.a.push_back(std::move(step.a));
    traj.P.push_back(std::move(step.P_next));
  }
  return traj;
}

}  // namespace tdhfc
