#pragma once

// Trust-region quasi-Newton minimization with limited-memory SR1 Hessian
// approximations, multi-start over Glorot seeds and the alpha/beta
// selection rule for picking one converged run.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tdhfc/controller.hpp"
#include "tdhfc/problem.hpp"

namespace tdhfc {

struct OptConfig {
  int max_iters = 100;
  int memory = 10;
  double tr_radius0 = 1.0;
  double tr_max = 100.0;
  double eta_accept = 1e-4;
  double shrink = 0.25;
  double expand = 2.0;
  double mae_tol = 1e-2;
  int n_restarts = 1;
  std::uint64_t seed0 = 0;
  /// Gradient descent with Armijo backtracking instead of TR-SR1; debugging aid.
  bool gradient_descent = false;

  void validate() const;
};

/// What minimize() needs from an objective. `metric` drives termination:
/// the run is converged once an accepted iterate has metric < mae_tol.
struct OracleResult {
  double value = 0.0;
  RVector gradient;
  double metric = 0.0;
};
using Oracle = std::function<OracleResult(const RVector& x)>;

enum class StopReason { converged, max_iters, radius_collapsed, non_finite_objective };
std::string to_string(StopReason r);

struct MinimizeResult {
  RVector x;
  double value = 0.0;
  double metric = 0.0;
  int iters = 0;
  bool converged = false;
  StopReason reason = StopReason::max_iters;
  double grad_norm_initial = 0.0;
  double grad_norm_final = 0.0;
  /// Objective at the start point and after every accepted step.
  std::vector<double> history;
};

/// Dense Hessian approximation from SR1 pairs (s_i, y_i), oldest first,
/// starting from gamma I with gamma = y^T y / s^T y of the newest pair
/// (1 when that is not positive). A pair is skipped when
/// |s^T (y - B s)| < 1e-8 ||s|| ||y - B s||.
RMatrix sr1_matrix(const std::vector<RVector>& s, const std::vector<RVector>& y, int dim);

/// Steihaug truncated CG for min g^T p + p^T B p / 2 subject to ||p|| <= radius.
RVector steihaug(const RMatrix& B, const RVector& g, double radius);

MinimizeResult minimize(const Oracle& oracle, const RVector& x0, const OptConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  Theta theta_final;
  double alpha = 0.0;  // mean squared control cost
  double beta = 0.0;   // terminal MAE
  int iters = 0;
  bool converged = false;
  double grad_norm_initial = 0.0;
  double grad_norm_final = 0.0;
  double objective_final = 0.0;
  std::string status;
  std::vector<double> history;
};

/// Adapts a control problem to the oracle interface (metric = terminal MAE).
Oracle make_oracle(const ControlProblem& problem);

RunRecord run_single(const ControlProblem& problem, std::uint64_t seed, const OptConfig& cfg);

struct MultistartOptions {
  int jobs = 1;
  /// Stop launching new restarts once this many runs converged (0 = never).
  int stop_after_converged = 0;
  /// Called (serialized) after every completed run, e.g. to persist a ledger.
  std::function<void(const RunRecord&)> on_record;
  /// Records from an earlier, interrupted campaign; their seeds are skipped.
  std::vector<RunRecord> resume;
};

/// Runs seeds seed0, seed0 + 1, ... and returns the records ordered by seed.
std::vector<RunRecord> multistart(const ControlProblem& problem, const OptConfig& cfg,
                                  const MultistartOptions& opts = {});

/// Index (into `records`) of the converged run minimizing a~^2 + b~^2 after
/// min-max rescaling alpha and beta over the converged pool. Ties go to the
/// lower raw beta, then the lower seed. Throws NoConvergedRuns.
std::size_t select_best(const std::vector<RunRecord>& records);

std::string records_to_json(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_json(const std::string& text);

}  // namespace tdhfc
