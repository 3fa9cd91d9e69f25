#include <benchmark/benchmark.h>

#include "tdhfc/data_files.hpp"
#include "tdhfc/matexp.hpp"
#include "tdhfc/problem.hpp"

using namespace tdhfc;

namespace {

ControlProblem problem(const std::string& file, const NetConfig& net, std::vector<double> p0, std::vector<double> pt,
                       double dt, int K, double rho, bool rescale) {
  FeedbackModel m(orthogonalize(load_system(resolve_data_file(file).string())), net);
  return ControlProblem(std::move(m),
                        ControlSpec{HermMatrix::diagonal(p0), HermMatrix::diagonal(pt), dt, K, rho, rescale});
}

ControlProblem h2(int K) { return problem("h2_sto3g.json", {{4, 4, 4, 1}}, {0, 1}, {1, 0}, 8.268e-3, K, 1e4, false); }

ControlProblem lih(int K) {
  return problem("lih_sto3g.json", {{36, 4, 4, 4, 3}, OutputActivation::scaled_tanh}, {1, 1, 0, 0, 0, 0},
                 {0, 1, 0, 0, 0, 1}, 8.268e-4, K, 1e3, true);
}

void BM_PropagateH2(benchmark::State& st) {
  const ControlProblem p = h2(static_cast<int>(st.range(0)));
  const Theta t = glorot_init(p.model().net(), 0);
  for (auto _ : st) benchmark::DoNotOptimize(p.trajectory(t));
}
BENCHMARK(BM_PropagateH2)->Arg(50)->Arg(700)->Unit(benchmark::kMillisecond);

void BM_GradientH2(benchmark::State& st) {
  const ControlProblem p = h2(static_cast<int>(st.range(0)));
  const Theta t = glorot_init(p.model().net(), 0);
  for (auto _ : st) benchmark::DoNotOptimize(p.evaluate(t, true));
}
BENCHMARK(BM_GradientH2)->Arg(50)->Arg(700)->Unit(benchmark::kMillisecond);

void BM_GradientLiH(benchmark::State& st) {
  const ControlProblem p = lih(static_cast<int>(st.range(0)));
  const Theta t = glorot_init(p.model().net(), 0);
  for (auto _ : st) benchmark::DoNotOptimize(p.evaluate(t, true));
}
BENCHMARK(BM_GradientLiH)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ExpmWithJacobian(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(std::sin(i + 2.0 * j), std::cos(3.0 * i - j));
  const HermMatrix H(CMatrix(m + m.adjoint()));
  for (auto _ : st) benchmark::DoNotOptimize(expm_with_jacobian(H, cplx(0.0, -2.0 * 8.268e-3)));
}
BENCHMARK(BM_ExpmWithJacobian)->Arg(2)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
