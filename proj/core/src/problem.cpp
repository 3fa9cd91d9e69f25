#include "tdhfc/problem.hpp"

#include <cmath>

#include "tdhfc/errors.hpp"

namespace tdhfc {

ControlProblem::ControlProblem(FeedbackModel model, ControlSpec spec)
    : model_(std::move(model)), spec_(std::move(spec)) {
  const int n = model_.n();
  if (spec_.P0.dim() != n || spec_.PT.dim() != n) throw DimensionMismatch("initial/target state size != N");
  if (!(spec_.dt > 0.0)) throw Error("dt must be positive");
  if (spec_.K < 1) throw Error("K must be >= 1");
}

Trajectory ControlProblem::trajectory(const Theta& theta) const {
  return propagate(model_, theta, spec_.P0, spec_.dt, spec_.K);
}

ControlProblem::Evaluation ControlProblem::evaluate(const Theta& theta, bool with_gradient,
                                                    const AdjointHooks& hooks) const {
  Evaluation e;
  e.trajectory = trajectory(theta);
  e.objective = objective(e.trajectory, model_, theta, spec_.PT, spec_.rho, spec_.rescale);
  e.mae = terminal_mae(e.trajectory.P.back(), spec_.PT);
  if (with_gradient) {
    e.gradient = sweep_and_gradient(e.trajectory, model_, theta, spec_.PT, spec_.rho, spec_.rescale, hooks).grad;
  }
  return e;
}

double ControlProblem::value(const Theta& theta) const { return evaluate(theta, false).objective.total; }

double ControlProblem::control_cost(const Trajectory& traj) const {
  double sum = 0.0;
  for (int k = 0; k < traj.K; ++k) {
    sum += external_potential(model_.system(), traj.a[k]).matrix().squaredNorm();
  }
  double alpha = sum / traj.K;
  if (spec_.rescale) alpha /= static_cast<double>(model_.n()) * model_.n();
  return alpha;
}

RVector ControlProblem::fd_gradient(const Theta& theta, double h) const {
  RVector g(theta.size());
  Theta t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    t(i) = theta(i) + h;
    const double fp = value(t);
    t(i) = theta(i) - h;
    const double fm = value(t);
    t(i) = theta(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace tdhfc
