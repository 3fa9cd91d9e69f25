#pragma once

// Closed-loop MMUT propagation:
//
//   U^0 = exp(-i dt H(P^0)),      P^1     = U^0 P^0 U^0^dagger
//   U^k = exp(-2i dt H(P^k)),     P^{k+1} = U^k P^{k-1} U^k^dagger,  k >= 1
//
// with H(P) = H0(P) + V(P; theta) and the amplitudes evaluated at P^k for
// the step leaving k.

#include <vector>

#include "tdhfc/controller.hpp"
#include "tdhfc/herm.hpp"
#include "tdhfc/molsys.hpp"

namespace tdhfc {

/// A molecular system paired with its Hermitian basis and the architecture
/// of the feedback network. Parameters theta are supplied per call.
class FeedbackModel {
 public:
  FeedbackModel(MolSystem sys, NetConfig net);

  const MolSystem& system() const noexcept { return sys_; }
  const HermBasis& basis() const noexcept { return basis_; }
  const NetConfig& net() const noexcept { return net_; }
  int n() const noexcept { return sys_.n(); }

  RVector amplitudes(const Theta& theta, const HermMatrix& P) const;
  HermMatrix hamiltonian(const Theta& theta, const HermMatrix& P) const;

 private:
  MolSystem sys_;
  HermBasis basis_;
  NetConfig net_;
};

struct StepResult {
  HermMatrix P_next;
  CMatrix U;
  RVector a;
};

StepResult step_first(const FeedbackModel& model, const Theta& theta, const HermMatrix& P0, double dt);

StepResult step_mmut(const FeedbackModel& model, const Theta& theta, const HermMatrix& Pk,
                     const HermMatrix& Pkm1, int k, double dt);

struct InvariantStats {
  double max_unitarity = 0.0;    // max_k ||U^k^dagger U^k - I||_F
  double max_trace_drift = 0.0;  // max_k |tr P^k - tr P^0|
  double max_idempotency = 0.0;  // max_k ||(P^k)^2 - P^k||_F
  double max_hermiticity = 0.0;  // max_k ||P^k - P^k^dagger||_F
};

struct Trajectory {
  std::vector<HermMatrix> P;  // K + 1 states
  std::vector<CMatrix> U;     // K propagators
  std::vector<RVector> a;     // K amplitude vectors, a[k] = a(P^k)
  double dt = 0.0;
  int K = 0;
  bool initial_idempotent = true;
  InvariantStats stats;
};

/// Tolerances checked at every step; propagate throws InvariantBreach when
/// a quantity exceeds ten times its tolerance.
struct InvariantTolerances {
  double unitarity = 1e-10;
  double trace = 1e-10;
  double idempotency = 1e-8;
};

/// Runs K steps from P0. Idempotency is only policed when P0 itself is
/// idempotent to 1e-8 (reported through Trajectory::initial_idempotent).
Trajectory propagate(const FeedbackModel& model, const Theta& theta, const HermMatrix& P0, double dt, int K,
                     const InvariantTolerances& tol = {});

}  // namespace tdhfc
