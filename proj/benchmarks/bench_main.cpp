#include <cmath>

#include <benchmark/benchmark.h>

#include "vrmhd/cases.hpp"
#include "vrmhd/galerkin.hpp"
#include "vrmhd/integrators.hpp"

using namespace vrmhd;

namespace {

CaseSpec ot(int cells) {
    CaseSpec s = desk_case(CaseName::OrszagTangIdeal);
    s.axes[0].cells = s.axes[1].cells = cells;
    return s;
}

} // namespace

// Matrix-free density-weighted mass product on the velocity space.
static void BM_WeightedMassApply(benchmark::State& state) {
    const CaseSpec spec = ot(static_cast<int>(state.range(0)));
    const DeRhamComplex cx = build_complex(complex_params(spec));
    const Galerkin gk(cx);
    const State st = init_case(cx, spec);
    const Eigen::VectorXd rho = gk.eval_quad(SpaceTag::V3, st.rho.coeffs, 0);
    for (auto _ : state) benchmark::DoNotOptimize(gk.weighted_apply(SpaceTag::X, rho, st.u.coeffs));
    state.SetItemsProcessed(state.iterations() * st.u.coeffs.size());
}
BENCHMARK(BM_WeightedMassApply)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_MassApplyV2(benchmark::State& state) {
    const CaseSpec spec = ot(static_cast<int>(state.range(0)));
    const DeRhamComplex cx = build_complex(complex_params(spec));
    const Galerkin gk(cx);
    const State st = init_case(cx, spec);
    for (auto _ : state) benchmark::DoNotOptimize(gk.mass_apply(SpaceTag::V2, st.B.coeffs));
}
BENCHMARK(BM_MassApplyV2)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

// One full split step of ideal Orszag-Tang with artificial dissipation.
static void BM_StrangStep(benchmark::State& state) {
    const CaseSpec spec = ot(static_cast<int>(state.range(0)));
    const DeRhamComplex cx = build_complex(complex_params(spec));
    const Galerkin gk(cx);
    Integrator in(gk, Eos(spec.gamma));
    const State st = init_case(cx, spec);
    StepConfig sc;
    sc.dt = spec.dt;
    sc.mu = spec.mu;
    sc.eta = spec.eta;
    for (auto _ : state) benchmark::DoNotOptimize(in.strang_step(st, sc));
}
BENCHMARK(BM_StrangStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
