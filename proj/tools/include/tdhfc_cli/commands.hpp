#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tdhfc/adjoint.hpp"
#include "tdhfc/problem.hpp"

namespace tdhfc::cli {

enum ExitCode : int { ok = 0, internal_failure = 1, usage_error = 2, no_converged_runs = 3 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GradCheck {
  RVector adjoint;
  RVector fd;
  double max_rel_error = 0.0;
  int worst = -1;
};

/// Richardson-extrapolated central differences, (4 D(h/2) - D(h)) / 3,
/// of the objective value.
RVector richardson_gradient(const ControlProblem& problem, const Theta& theta, double h);

/// Per-component error |g - fd| / max(|fd|, 1e-8 ||fd||).
GradCheck compare_gradients(const RVector& adjoint, const RVector& fd);

GradCheck gradcheck(const ControlProblem& problem, const Theta& theta, double h,
                    const AdjointHooks& hooks = {});

}  // namespace tdhfc::cli
