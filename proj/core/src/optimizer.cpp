#include "tdhfc/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "tdhfc/errors.hpp"

namespace tdhfc {

void OptConfig::validate() const {
  if (max_iters < 0 || memory < 1 || n_restarts < 1) throw Error("optimizer: iteration counts must be positive");
  if (!(tr_radius0 > 0.0) || !(tr_max >= tr_radius0)) throw Error("optimizer: need 0 < tr_radius0 <= tr_max");
  if (!(eta_accept > 0.0 && eta_accept < 1.0)) throw Error("optimizer: eta_accept must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0) || !(expand > 1.0)) throw Error("optimizer: bad radius factors");
  if (!(mae_tol > 0.0)) throw Error("optimizer: mae_tol must be positive");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iters: return "max_iters";
    case StopReason::radius_collapsed: return "radius_collapsed";
    case StopReason::non_finite_objective: return "non_finite_objective";
  }
  return "unknown";
}

RMatrix sr1_matrix(const std::vector<RVector>& s, const std::vector<RVector>& y, int dim) {
  double gamma = 1.0;
  if (!s.empty()) {
    const double sy = s.back().dot(y.back());
    const double yy = y.back().squaredNorm();
    if (sy > 0.0) gamma = std::clamp(yy / sy, 1e-8, 1e8);
  }
  RMatrix B = gamma * RMatrix::Identity(dim, dim);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const RVector v = y[i] - B * s[i];
    const double den = v.dot(s[i]);
    if (std::abs(den) < 1e-8 * s[i].norm() * v.norm() || den == 0.0) continue;
    B.noalias() += (v * v.transpose()) / den;
  }
  return 0.5 * (B + B.transpose());
}

namespace {

// Positive tau with ||z + tau d|| = radius.
double to_boundary(const RVector& z, const RVector& d, double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * z.dot(d);
  const double c = z.squaredNorm() - radius * radius;
  return (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
}

}  // namespace

RVector steihaug(const RMatrix& B, const RVector& g, double radius) {
  const Eigen::Index n = g.size();
  RVector z = RVector::Zero(n);
  const double gnorm = g.norm();
  if (gnorm == 0.0) return z;
  const double tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  RVector r = g;
  RVector d = -r;
  for (Eigen::Index it = 0; it < 2 * n + 10; ++it) {
    const RVector Bd = B * d;
    const double dBd = d.dot(Bd);
    if (dBd <= 0.0) return z + to_boundary(z, d, radius) * d;
    const double rr = r.squaredNorm();
    const double alpha = rr / dBd;
    RVector z_next = z + alpha * d;
    if (z_next.norm() >= radius) return z + to_boundary(z, d, radius) * d;
    r += alpha * Bd;
    z = std::move(z_next);
    if (r.norm() < tol) return z;
    d = -r + (r.squaredNorm() / rr) * d;
  }
  return z;
}

namespace {

bool finite(const OracleResult& r) { return std::isfinite(r.value) && r.gradient.allFinite(); }

OracleResult safe_call(const Oracle& oracle, const RVector& x) {
  try {
    return oracle(x);
  } catch (const Error&) {
    // e.g. an invariant breach at an extreme trial point
    return {std::numeric_limits<double>::quiet_NaN(), RVector(), std::numeric_limits<double>::quiet_NaN()};
  }
}

MinimizeResult gradient_descent(const Oracle& oracle, const RVector& x0, const OptConfig& cfg,
                                MinimizeResult res, OracleResult cur) {
  RVector x = x0;
  double step = cfg.tr_radius0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    res.iters = it;
    const double gnorm = cur.gradient.norm();
    bool accepted = false;
    while (step >= 1e-12) {
      const RVector xt = x - (step / gnorm) * cur.gradient;
      OracleResult trial = safe_call(oracle, xt);
      if (finite(trial) && trial.value <= cur.value - 1e-4 * step * gnorm) {
        x = xt;
        cur = std::move(trial);
        accepted = true;
        step = std::min(cfg.expand * step, cfg.tr_max);
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) {
      res.reason = StopReason::radius_collapsed;
      break;
    }
    res.history.push_back(cur.value);
    if (cur.metric < cfg.mae_tol) {
      res.converged = true;
      res.reason = StopReason::converged;
      break;
    }
  }
  res.x = x;
  res.value = cur.value;
  res.metric = cur.metric;
  res.grad_norm_final = cur.gradient.norm();
  return res;
}

}  // namespace

MinimizeResult minimize(const Oracle& oracle, const RVector& x0, const OptConfig& cfg) {
  cfg.validate();
  MinimizeResult res;
  res.x = x0;
  OracleResult cur = safe_call(oracle, x0);
  if (!finite(cur)) {
    res.value = cur.value;
    res.metric = cur.metric;
    res.reason = StopReason::non_finite_objective;
    return res;
  }
  res.grad_norm_initial = cur.gradient.norm();
  res.history.push_back(cur.value);
  if (cur.metric < cfg.mae_tol) {
    res.value = cur.value;
    res.metric = cur.metric;
    res.converged = true;
    res.reason = StopReason::converged;
    res.grad_norm_final = res.grad_norm_initial;
    return res;
  }
  if (cfg.gradient_descent) return gradient_descent(oracle, x0, cfg, std::move(res), std::move(cur));

  const int dim = static_cast<int>(x0.size());
  RVector x = x0;
  double radius = cfg.tr_radius0;
  std::vector<RVector> S, Y;
  res.reason = StopReason::max_iters;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    res.iters = it;
    const RMatrix B = sr1_matrix(S, Y, dim);
    const RVector p = steihaug(B, cur.gradient, radius);
    const double predicted = -(cur.gradient.dot(p) + 0.5 * p.dot(B * p));
    const RVector xt = x + p;
    OracleResult trial = safe_call(oracle, xt);

    double ratio = -std::numeric_limits<double>::infinity();
    if (finite(trial)) {
      if (predicted > 0.0) ratio = (cur.value - trial.value) / predicted;
      S.push_back(p);
      Y.push_back(trial.gradient - cur.gradient);
      if (static_cast<int>(S.size()) > cfg.memory) {
        S.erase(S.begin());
        Y.erase(Y.begin());
      }
    }

    const double pnorm = p.norm();
    if (ratio < 0.25) {
      radius = cfg.shrink * std::min(radius, pnorm);
    } else if (ratio > 0.75 && pnorm >= 0.8 * radius) {
      radius = std::min(cfg.expand * radius, cfg.tr_max);
    }

    if (ratio >= cfg.eta_accept && trial.value <= cur.value) {
      x = xt;
      cur = std::move(trial);
      res.history.push_back(cur.value);
      if (cur.metric < cfg.mae_tol) {
        res.converged = true;
        res.reason = StopReason::converged;
        break;
      }
    }
    if (radius < 1e-12) {
      res.reason = StopReason::radius_collapsed;
      break;
    }
  }
  res.x = x;
  res.value = cur.value;
  res.metric = cur.metric;
  res.grad_norm_final = cur.gradient.norm();
  return res;
}

Oracle make_oracle(const ControlProblem& problem) {
  return [&problem](const RVector& x) {
    auto e = problem.evaluate(x, true);
    return OracleResult{e.objective.total, std::move(e.gradient), e.mae};
  };
}

RunRecord run_single(const ControlProblem& problem, std::uint64_t seed, const OptConfig& cfg) {
  const Theta theta0 = glorot_init(problem.model().net(), seed);
  const MinimizeResult m = minimize(make_oracle(problem), theta0, cfg);
  RunRecord r;
  r.seed = seed;
  r.theta_final = m.x;
  r.iters = m.iters;
  r.grad_norm_initial = m.grad_norm_initial;
  r.grad_norm_final = m.grad_norm_final;
  r.objective_final = m.value;
  r.status = to_string(m.reason);
  r.history = m.history;
  if (m.reason == StopReason::non_finite_objective) {
    r.alpha = r.beta = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const Trajectory traj = problem.trajectory(m.x);
  r.alpha = problem.control_cost(traj);
  r.beta = terminal_mae(traj.P.back(), problem.spec().PT);
  r.converged = m.converged && r.beta < cfg.mae_tol;
  return r;
}

std::vector<RunRecord> multistart(const ControlProblem& problem, const OptConfig& cfg,
                                  const MultistartOptions& opts) {
  cfg.validate();
  std::vector<RunRecord> out;
  std::set<std::uint64_t> done;
  int converged = 0;
  for (const auto& r : opts.resume) {
    out.push_back(r);
    done.insert(r.seed);
    converged += r.converged ? 1 : 0;
  }

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.n_restarts; ++i) {
    const std::uint64_t s = cfg.seed0 + static_cast<std::uint64_t>(i);
    if (!done.count(s)) seeds.push_back(s);
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<int> n_conv{converged};
  auto enough = [&] { return opts.stop_after_converged > 0 && n_conv.load() >= opts.stop_after_converged; };

  auto worker = [&] {
    while (!enough()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      RunRecord r = run_single(problem, seeds[i], cfg);
      std::lock_guard<std::mutex> lock(mu);
      if (r.converged) ++n_conv;
      if (opts.on_record) opts.on_record(r);
      out.push_back(std::move(r));
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  return out;
}

std::size_t select_best(const std::vector<RunRecord>& records) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].converged) pool.push_back(i);
  }
  if (pool.empty()) throw NoConvergedRuns("select_best: no converged runs");

  auto rescaler = [&](auto field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto i : pool) {
      lo = std::min(lo, field(records[i]));
      hi = std::max(hi, field(records[i]));
    }
    return [lo, hi, field](const RunRecord& r) { return hi > lo ? (field(r) - lo) / (hi - lo) : 0.0; };
  };
  const auto a = rescaler([](const RunRecord& r) { return r.alpha; });
  const auto b = rescaler([](const RunRecord& r) { return r.beta; });

  std::size_t best = pool.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (auto i : pool) {
    const auto& r = records[i];
    const double score = a(r) * a(r) + b(r) * b(r);
    const auto& cur = records[best];
    if (score < best_score ||
        (score == best_score && (r.beta < cur.beta || (r.beta == cur.beta && r.seed < cur.seed)))) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double number_or_nan(const nlohmann::json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string records_to_json(const std::vector<RunRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["theta"] = std::vector<double>(r.theta_final.data(), r.theta_final.data() + r.theta_final.size());
    j["alpha"] = finite_or_null(r.alpha);
    j["beta"] = finite_or_null(r.beta);
    j["iters"] = r.iters;
    j["converged"] = r.converged;
    j["grad_norm_initial"] = finite_or_null(r.grad_norm_initial);
    j["grad_norm_final"] = finite_or_null(r.grad_norm_final);
    j["objective_final"] = finite_or_null(r.objective_final);
    j["status"] = r.status;
    j["objective_history"] = r.history;
    arr.push_back(std::move(j));
  }
  return arr.dump(1);
}

std::vector<RunRecord> records_from_json(const std::string& text) {
  std::vector<RunRecord> out;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw ParseError("run ledger must be a JSON array");
    for (const auto& j : arr) {
      RunRecord r;
      r.seed = j.at("seed").get<std::uint64_t>();
      const auto theta = j.at("theta").get<std::vector<double>>();
      r.theta_final = Eigen::Map<const RVector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
      r.alpha = number_or_nan(j.at("alpha"));
      r.beta = number_or_nan(j.at("beta"));
      r.iters = j.at("iters").get<int>();
      r.converged = j.at("converged").get<bool>();
      r.grad_norm_initial = number_or_nan(j.value("grad_norm_initial", nlohmann::json()));
      r.grad_norm_final = number_or_nan(j.value("grad_norm_final", nlohmann::json()));
      r.objective_final = number_or_nan(j.value("objective_final", nlohmann::json()));
      r.status = j.value("status", std::string());
      r.history = j.value("objective_history", std::vector<double>{});
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run ledger: ") + e.what());
  }
  return out;
}

}  // namespace tdhfc
