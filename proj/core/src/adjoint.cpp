#include "tdhfc/adjoint.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "tdhfc/errors.hpp"
#include "tdhfc/matexp.hpp"

namespace tdhfc {

double fidelity(const HermMatrix& PK, const HermMatrix& PT) {
  if (PK.dim() != PT.dim()) throw DimensionMismatch("fidelity: dimensions differ");
  return (PK.matrix() * PT.matrix() * PK.matrix()).trace().real();
}

double terminal_mae(const HermMatrix& PK, const HermMatrix& PT) {
  if (PK.dim() != PT.dim()) throw DimensionMismatch("terminal_mae: dimensions differ");
  const double n = PK.dim();
  return (PK.matrix() - PT.matrix()).cwiseAbs().sum() / (n * n);
}

double running_cost_scale(int n, int K, bool rescale) {
  return rescale ? 1.0 / (static_cast<double>(n) * n * K) : 1.0;
}

ObjectiveValue objective(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                         const HermMatrix& PT, double rho, bool rescale) {
  (void)theta;  // amplitudes were recorded along the trajectory
  const auto& sys = model.system();
  double sum = 0.0;
  for (int k = 0; k < traj.K; ++k) sum += external_potential(sys, traj.a[k]).matrix().squaredNorm();
  ObjectiveValue v;
  v.rho = rho;
  v.rescaled = rescale;
  v.running_cost = 0.5 * running_cost_scale(model.n(), traj.K, rescale) * sum;
  v.fidelity = fidelity(traj.P.back(), PT);
  v.terminal_term = -0.5 * rho * v.fidelity * v.fidelity;
  v.total = v.running_cost + v.terminal_term;
  return v;
}

CMatrix fidelity_gradient(const HermMatrix& PK, const HermMatrix& PT, double rho) {
  const double F = fidelity(PK, PT);
  const HermMatrix Z(CMatrix(PK.matrix() * PT.matrix() * PK.matrix()));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(Z.matrix());
  if (es.info() != Eigen::Success) throw EigenFailure("fidelity_gradient: eigensolver failed");
  const CMatrix& V = es.eigenvectors();
  const CMatrix left = PK.matrix() * PT.matrix();
  const CMatrix right = PT.matrix() * PK.matrix();
  CMatrix g = CMatrix::Zero(PK.dim(), PK.dim());
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    const CMatrix proj = V.col(j) * V.col(j).adjoint();
    g += proj * left + right * proj;
  }
  return rho * F * g;
}

Zetas build_zetas(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk, int k, double dt) {
  const double f = k == 0 ? 1.0 : 2.0;
  const auto& sys = model.system();
  VextDerivs vd = vext_with_derivs(sys, model.basis(), model.net(), theta, Pk);
  const HermMatrix H = hamiltonian(sys, Pk, vd.a);
  Tensor4 dH = sys.dH0_dP;
  dH += vd.dV_dP;
  const SpectralExp minus(H, cplx{0.0, -f * dt});
  const SpectralExp plus(H, cplx{0.0, f * dt});
  return {compose(minus.jacobian(), dH), compose(plus.jacobian(), dH)};
}

namespace {

// Per-step quantities re-derived from a stored state during the backward pass.
struct StepLinearization {
  VextDerivs vd;
  SpectralExp minus;
  SpectralExp plus;
};

StepLinearization linearize(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk, double factor,
                            double dt) {
  VextDerivs vd = vext_with_derivs(model.system(), model.basis(), model.net(), theta, Pk);
  const HermMatrix H = hamiltonian(model.system(), Pk, vd.a);
  SpectralExp minus(H, cplx{0.0, -factor * dt});
  SpectralExp plus(H, cplx{0.0, factor * dt});
  return {std::move(vd), std::move(minus), std::move(plus)};
}

// W = conj(c-) D-*(lambda U P_prev) + conj(c+) D+*(P_prev U^dagger lambda),
// c-+ = -+ i f dt. Shared by the adjoint recursion (as W : conj(dH/dP)) and
// by the parameter gradient (as Re<W, dV/dtheta>).
CMatrix exp_adjoint_source(const StepLinearization& lin, const CMatrix& lambda_next, const CMatrix& U,
                           const CMatrix& P_prev, double factor, double dt) {
  const cplx i_fdt{0.0, factor * dt};
  return i_fdt * lin.minus.frechet_adjoint(lambda_next * U * P_prev) -
         i_fdt * lin.plus.frechet_adjoint(P_prev * U.adjoint() * lambda_next);
}

void accumulate_theta(RVector& grad, const MolSystem& sys, const RMatrix& da_dtheta, const CMatrix& X) {
  // Re<X, sum_j da_j/dtheta M_j> with real symmetric M_j
  const RMatrix Xr = X.real();
  for (int j = 0; j < sys.n_active(); ++j) {
    const double w = Xr.cwiseProduct(sys.active_dipole(j)).sum();
    grad.noalias() += w * da_dtheta.row(j).transpose();
  }
}

Gradient backward(const Trajectory& traj, const FeedbackModel& model, const Theta& theta, const HermMatrix& PT,
                  double rho, bool rescale, const AdjointHooks& hooks, bool want_grad) {
  const auto& sys = model.system();
  const int K = traj.K;
  const double dt = traj.dt;
  const double s = running_cost_scale(model.n(), K, rescale);

  Gradient out;
  auto& sw = out.sweep;
  sw.lambda.assign(static_cast<std::size_t>(K), CMatrix());
  sw.fidelity = fidelity(traj.P[K], PT);
  sw.terminal_mae = terminal_mae(traj.P[K], PT);
  sw.lambda[K - 1] = -fidelity_gradient(traj.P[K], PT, rho);
  if (want_grad) out.grad = RVector::Zero(model.net().n_params());

  for (int k = K - 1; k >= 0; --k) {
    const double factor = k == 0 ? 1.0 : 2.0;
    const HermMatrix& P_prev = k == 0 ? traj.P[0] : traj.P[k - 1];
    const StepLinearization lin = linearize(model, theta, traj.P[k], factor, dt);
    const CMatrix& lambda_next = sw.at(k + 1);
    const CMatrix W = exp_adjoint_source(lin, lambda_next, traj.U[k], P_prev.matrix(), factor, dt);
    const CMatrix sV = s * lin.vd.value.matrix();

    if (want_grad) accumulate_theta(out.grad, sys, lin.vd.da_dtheta, CMatrix(sV + W));
    if (k == 0) break;

    Tensor4 dH = sys.dH0_dP;
    dH += lin.vd.dV_dP;
    CMatrix lam = contract_right_conj(sV, lin.vd.dV_dP) + hooks.zeta_sign * contract_right_conj(W, dH);
    if (k + 2 <= K) {
      const CMatrix& U1 = traj.U[k + 1];
      lam += U1.adjoint() * sw.at(k + 2) * U1;
    }
    sw.lambda[k - 1] = std::move(lam);
  }
  return out;
}

}  // namespace

AdjointSweep adjoint_sweep(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                           const HermMatrix& PT, double rho, bool rescale, const AdjointHooks& hooks) {
  return backward(traj, model, theta, PT, rho, rescale, hooks, false).sweep;
}

RVector theta_gradient(const Trajectory& traj, const AdjointSweep& sweep, const FeedbackModel& model,
                       const Theta& theta, double dt, bool rescale) {
  const auto& sys = model.system();
  const int K = traj.K;
  if (static_cast<int>(sweep.lambda.size()) != K) throw DimensionMismatch("theta_gradient: sweep length != K");
  const double s = running_cost_scale(model.n(), K, rescale);
  RVector grad = RVector::Zero(model.net().n_params());
  for (int k = 0; k < K; ++k) {
    const double factor = k == 0 ? 1.0 : 2.0;
    const HermMatrix& P_prev = k == 0 ? traj.P[0] : traj.P[k - 1];
    const StepLinearization lin = linearize(model, theta, traj.P[k], factor, dt);
    const CMatrix W = exp_adjoint_source(lin, sweep.at(k + 1), traj.U[k], P_prev.matrix(), factor, dt);
    accumulate_theta(grad, sys, lin.vd.da_dtheta, CMatrix(s * lin.vd.value.matrix() + W));
  }
  return grad;
}

Gradient sweep_and_gradient(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                            const HermMatrix& PT, double rho, bool rescale, const AdjointHooks& hooks) {
  return backward(traj, model, theta, PT, rho, rescale, hooks, true);
}

}  // namespace tdhfc
