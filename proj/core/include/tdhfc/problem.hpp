#pragma once

#include "tdhfc/adjoint.hpp"
#include "tdhfc/propagator.hpp"

namespace tdhfc {

struct ControlSpec {
  HermMatrix P0;
  HermMatrix PT;
  double dt = 0.0;
  int K = 0;
  double rho = 0.0;
  bool rescale = false;
};

/// The discrete optimal-control problem for a fixed system, network layout,
/// initial/target states and horizon. Every evaluation re-propagates.
class ControlProblem {
 public:
  ControlProblem(FeedbackModel model, ControlSpec spec);

  const FeedbackModel& model() const noexcept { return model_; }
  const ControlSpec& spec() const noexcept { return spec_; }

  struct Evaluation {
    ObjectiveValue objective;
    RVector gradient;  // empty unless requested
    double mae = 0.0;
    Trajectory trajectory;
  };

  Trajectory trajectory(const Theta& theta) const;
  Evaluation evaluate(const Theta& theta, bool with_gradient, const AdjointHooks& hooks = {}) const;
  double value(const Theta& theta) const;

  /// Mean squared control cost: sum_k ||V^k||_F^2 / K, further divided by
  /// N^2 when the running cost is rescaled.
  double control_cost(const Trajectory& traj) const;

  /// Central finite differences of value() with step h per component.
  RVector fd_gradient(const Theta& theta, double h) const;

 private:
  FeedbackModel model_;
  ControlSpec spec_;
};

}  // namespace tdhfc
