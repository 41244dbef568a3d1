#include <benchmark/benchmark.h>

#include <cmath>

#include "pdde/mild.hpp"

using namespace pdde;

namespace {
constexpr double pi = 3.14159265358979323846;

HistorySegment make_history(const SpatialGrid& g, int n, long S) {
    HistorySegment h;
    h.r = kInf;
    h.head = GridFunction(g, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < g.num_nodes(); ++i)
            h.head.at(k, i) = std::sin(pi * (i + 0.5) / g.num_nodes());
    h.tail.assign(S, h.head);
    return h;
}

ParameterPoint coupled(int n) {
    ParameterPoint a = ParameterPoint::laplace(n, 1, BcKind::dirichlet);
    for (int e = 0; e < n * n; ++e) {
        a.c0[e] = CoeffExpr::constant(0.1 * ((e % 2) ? -1 : 1));
        a.c1[e] = CoeffExpr::constant(0.05);
    }
    a.K_bound = 0.1;
    return a;
}
}  // namespace

static void BM_Assemble1D(benchmark::State& state) {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, state.range(0));
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.aij(0, 0, 0) = parse_expr("1 + 0.5*sin(x1)");
    for (auto _ : state) benchmark::DoNotOptimize(assemble_form(a, 0, 0.0, g));
}
BENCHMARK(BM_Assemble1D)->Arg(64)->Arg(256)->Arg(1024);

static void BM_Assemble2D(benchmark::State& state) {
    int c = static_cast<int>(state.range(0));
    SpatialGrid g = SpatialGrid::rectangle(0, 1, 0, 1, c, c);
    ParameterPoint a = ParameterPoint::laplace(1, 2, BcKind::dirichlet);
    a.aij(0, 0, 1) = parse_expr("0.3");
    a.aij(0, 1, 0) = parse_expr("0.3");
    for (auto _ : state) benchmark::DoNotOptimize(assemble_form(a, 0, 0.0, g));
}
BENCHMARK(BM_Assemble2D)->Arg(16)->Arg(64);

static void BM_PropagateDelayUnit(benchmark::State& state) {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, state.range(0));
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 100);
    EvolutionFamily fam(ParameterPoint::laplace(1, 1, BcKind::dirichlet), g, tg);
    GridFunction u(g, 1);
    for (int i = 0; i < g.num_nodes(); ++i) u.at(0, i) = std::sin(pi * (i + 0.5) / g.num_nodes());
    fam.propagate(0.0, 1.0, u);   // warm the factorization cache
    for (auto _ : state) benchmark::DoNotOptimize(fam.propagate(0.0, 1.0, u));
}
BENCHMARK(BM_PropagateDelayUnit)->Arg(64)->Arg(256)->Arg(1024);

static void BM_Propagate2D(benchmark::State& state) {
    int c = static_cast<int>(state.range(0));
    SpatialGrid g = SpatialGrid::rectangle(0, 1, 0, 1, c, c);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 50);
    EvolutionFamily fam(ParameterPoint::laplace(1, 2, BcKind::dirichlet), g, tg);
    GridFunction u(g, 1);
    u.at(0, g.node(c / 2, c / 2)) = 1.0;
    fam.propagate(0.0, 1.0, u);
    for (auto _ : state) benchmark::DoNotOptimize(fam.propagate(0.0, 1.0, u));
}
BENCHMARK(BM_Propagate2D)->Arg(32)->Arg(64);

static void BM_MarchingSolve(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 64);
    TimeGrid tg = TimeGrid::make(0.0, 3.0, 100);
    ParameterPoint a = coupled(n);
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = make_history(g, n, tg.steps_per_delay);
    for (auto _ : state) benchmark::DoNotOptimize(solve_marching(a, fam, h));
}
BENCHMARK(BM_MarchingSolve)->Arg(1)->Arg(2)->Arg(4);

static void BM_PicardSolve(benchmark::State& state) {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 64);
    TimeGrid tg = TimeGrid::make(0.0, 3.0, 100);
    ParameterPoint a = coupled(2);
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = make_history(g, 2, tg.steps_per_delay);
    PicardConfig cfg;
    cfg.mu = 2.0;   // skip the envelope fit inside the timed region
    for (auto _ : state) benchmark::DoNotOptimize(solve_picard(a, fam, h, cfg));
}
BENCHMARK(BM_PicardSolve);

static void BM_EnvelopeFit(benchmark::State& state) {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 64);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 50);
    EvolutionFamily fam(ParameterPoint::laplace(1, 1, BcKind::dirichlet), g, tg);
    for (auto _ : state) benchmark::DoNotOptimize(fam.estimate_M_gamma(2.0, 2.0, 8));
}
BENCHMARK(BM_EnvelopeFit);

BENCHMARK_MAIN();
