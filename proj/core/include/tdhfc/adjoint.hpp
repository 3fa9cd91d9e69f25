#pragma once

// Discrete objective and its exact gradient through the MMUT scheme.
//
//   J(theta) = s/2 sum_{k=0}^{K-1} ||V(P^k; theta)||_F^2 - rho/2 F(P^K, P_T)^2
//
// with s = 1 or 1/(N^2 K) (rescaled running cost), F(P, Q) = tr(P Q P).
// Adjoint variables lambda^k, k = 1..K, are swept backward from
// lambda^K = -rho F (P^K P_T + P_T P^K) and the parameter gradient is
// assembled from them and the matrix-exponential Jacobians.

#include <vector>

#include "tdhfc/herm.hpp"
#include "tdhfc/propagator.hpp"

namespace tdhfc {

/// tr(PK PT PK); the imaginary roundoff is dropped.
double fidelity(const HermMatrix& PK, const HermMatrix& PT);

/// (1/N^2) sum_{qr} |PK_qr - PT_qr|
double terminal_mae(const HermMatrix& PK, const HermMatrix& PT);

struct ObjectiveValue {
  double total = 0.0;
  double running_cost = 0.0;
  double terminal_term = 0.0;
  double fidelity = 0.0;
  double rho = 0.0;
  bool rescaled = false;
};

/// Scale applied to the running cost: 1, or 1/(N^2 K) when rescaling.
double running_cost_scale(int n, int K, bool rescale);

ObjectiveValue objective(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                         const HermMatrix& PT, double rho, bool rescale);

/// Gradient of (rho/2) F(PK, PT)^2 with respect to PK:
/// rho F sum_j (v_j v_j^dagger PK PT + PT PK v_j v_j^dagger), v_j the
/// eigenvectors of PK PT PK.
CMatrix fidelity_gradient(const HermMatrix& PK, const HermMatrix& PT, double rho);

struct Zetas {
  Tensor4 minus;  // Jacobian at Z = -i f dt H composed with dH/dP
  Tensor4 plus;   // same at Z = +i f dt H
};

/// f = 2 for k >= 1 and f = 1 for k = 0. dH/dP includes the density
/// dependence of the field-free Hamiltonian as well as of the feedback field.
Zetas build_zetas(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk, int k, double dt);

/// Test hooks for mutation checks of the gradient machinery.
struct AdjointHooks {
  double zeta_sign = 1.0;
};

struct AdjointSweep {
  std::vector<CMatrix> lambda;  // lambda[k - 1] holds lambda^k, k = 1..K
  double fidelity = 0.0;
  double terminal_mae = 0.0;

  const CMatrix& at(int k) const { return lambda.at(static_cast<std::size_t>(k - 1)); }
};

AdjointSweep adjoint_sweep(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                           const HermMatrix& PT, double rho, bool rescale, const AdjointHooks& hooks = {});

RVector theta_gradient(const Trajectory& traj, const AdjointSweep& sweep, const FeedbackModel& model,
                       const Theta& theta, double dt, bool rescale);

/// One backward pass producing both the sweep and the gradient.
struct Gradient {
  AdjointSweep sweep;
  RVector grad;
};

Gradient sweep_and_gradient(const Trajectory& traj, const FeedbackModel& model, const Theta& theta,
                            const HermMatrix& PT, double rho, bool rescale, const AdjointHooks& hooks = {});

}  // namespace tdhfc
