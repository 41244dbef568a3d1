#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pdde/analysis.hpp"
#include "pdde/mild.hpp"

using namespace pdde;

namespace {
constexpr double pi = 3.14159265358979323846;

HistorySegment sine_history(const SpatialGrid& g, long S, double scale = 1.0) {
    HistorySegment h;
    h.r = kInf;
    h.head = GridFunction(g, 1);
    for (int i = 0; i < g.num_nodes(); ++i)
        h.head.at(0, i) = scale * std::sin(pi * (g.coord(0, i) - g.lo[0]) /
                                           (g.hi[0] - g.lo[0]));
    h.tail.assign(S, h.head);
    return h;
}

double traj_gap(const Trajectory& a, const Trajectory& b, double p) {
    REQUIRE(a.states.size() == b.states.size());
    double gap = 0.0;
    for (size_t j = 0; j < a.states.size(); ++j) {
        GridFunction d = a.states[j];
        d.axpy(-1.0, b.states[j]);
        gap = std::max(gap, lp_norm(d, p));
    }
    return gap;
}

ParameterPoint delay_system() {
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.c0[0] = parse_expr("0.4");
    a.c1[0] = parse_expr("-0.3");
    a.K_bound = 0.5;
    return a;
}
}  // namespace

TEST_CASE("marching and picard agree to quadrature round-off") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 48);
    TimeGrid tg = TimeGrid::make(0.0, 3.0, 100);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, tg.steps_per_delay);

    Trajectory um = solve_marching(a, fam, h);
    PicardResult pr = solve_picard(a, fam, h, PicardConfig{});
    CHECK(traj_gap(um, pr.trajectory, 2.0) < 1e-10);
    CHECK(pr.iterations >= 2);
    for (double r : pr.ratios) CHECK(r <= 0.55);
    CHECK(um.provenance == Provenance::marching);
    CHECK(pr.trajectory.provenance == Provenance::picard);
    // the history segment is embedded in the returned trajectory
    CHECK(um.states.size() == size_t(tg.steps_per_delay + tg.steps + 1));
    CHECK(um.time_grid.t0 == doctest::Approx(-1.0));
}

TEST_CASE("left-rectangle and trapezoid quadratures converge together") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 32);
    ParameterPoint a = delay_system();
    double prev = kInf;
    for (long S : {50L, 100L, 200L}) {
        TimeGrid tg = TimeGrid::make(0.0, 2.0, S);
        EvolutionFamily fam(a, g, tg);
        HistorySegment h = sine_history(g, S);
        Trajectory left = solve_marching(a, fam, h, Quadrature::left_rectangle);
        Trajectory trap = solve_marching(a, fam, h, Quadrature::trapezoid);
        double gap = 0.0;
        const GridFunction& ul = left.states.back();
        const GridFunction& ut = trap.states.back();
        GridFunction d = ul;
        d.axpy(-1.0, ut);
        gap = lp_norm(d, kInf);
        CHECK(gap < prev);   // first-order difference shrinks with dt
        prev = gap;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("monolithic oracle cross-check with first-order Richardson decay") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 32);
    ParameterPoint a = delay_system();
    double prev = kInf;
    for (long S : {100L, 200L, 400L}) {
        TimeGrid tg = TimeGrid::make(0.0, 2.0, S);
        EvolutionFamily fam(a, g, tg);
        HistorySegment h = sine_history(g, S);
        Trajectory um = solve_marching(a, fam, h);
        Trajectory mono = oracle_monolithic(a, g, tg, h);
        double gap = traj_gap(um, mono, 2.0);
        CHECK(gap < 1e-2);
        CHECK(gap < 0.75 * prev);   // at least first-order decay under halving
        prev = gap;
    }
}

TEST_CASE("scalar delay oracle: closed form on the first interval") {
    // y' = -y + y(t-1)/2 with y == 1 on [-1,0]:
    // on [0,1], y(t) = 1/2 + e^{-t}/2
    auto hist = [](double) { return 1.0; };
    std::vector<double> y = oracle_method_of_steps(1.0, 0.0, 0.5, hist, 3.0, 200);
    CHECK(y[200] == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)).epsilon(1e-9));
    CHECK(0.5 + 0.5 * std::exp(-1.0) == doctest::Approx(0.68394).epsilon(1e-4));
    for (long m = 0; m <= 200; ++m) {
        double t = m / 200.0;
        CHECK(y[m] == doctest::Approx(0.5 + 0.5 * std::exp(-t)).epsilon(1e-9));
    }
}

TEST_CASE("PDE eigenmode reduces to the scalar delay equation") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 64);
    long S = 200;
    TimeGrid tg = TimeGrid::make(0.0, 3.0, S);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.c1[0] = parse_expr("0.5");
    a.K_bound = 0.5;
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, S);
    Trajectory um = solve_marching(a, fam, h);

    double hs = g.spacing(0);
    double lam = 2.0 / (hs * hs) * (1.0 - std::cos(hs));
    std::vector<double> y =
        oracle_method_of_steps(lam, 0.0, 0.5, [](double) { return 1.0; }, 3.0, S);
    for (long m = 0; m <= tg.steps; m += 37) {
        const GridFunction& u = um.states[S + m];
        double num = 0, den = 0;
        for (int i = 0; i < 64; ++i) {
            double s = std::sin(g.coord(0, i));
            num += u.at(0, i) * s;
            den += s * s;
        }
        CHECK(num / den == doctest::Approx(y[m]).epsilon(1e-4));
    }
}

TEST_CASE("superposition of initial data") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 32);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 80);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    long S = tg.steps_per_delay;

    HistorySegment h1 = sine_history(g, S);
    HistorySegment h2 = sine_history(g, S);
    for (int i = 0; i < 32; ++i) {
        double x = g.coord(0, i);
        h2.head.at(0, i) = std::sin(2 * x) + 0.3;
        for (long j = 0; j < S; ++j) h2.tail[j].at(0, i) = std::cos(x) * (j + 1.0) / S;
    }
    HistorySegment hsum = h1;
    hsum.head.axpy(1.0, h2.head);
    for (long j = 0; j < S; ++j) hsum.tail[j].axpy(1.0, h2.tail[j]);

    Trajectory u1 = solve_marching(a, fam, h1);
    Trajectory u2 = solve_marching(a, fam, h2);
    Trajectory us = solve_marching(a, fam, hsum);
    double worst = 0.0;
    for (size_t j = 0; j < us.states.size(); ++j) {
        GridFunction d = u1.states[j];
        d.axpy(1.0, u2.states[j]);
        d.axpy(-1.0, us.states[j]);
        worst = std::max(worst, lp_norm(d, kInf));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("translation identity") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 32);
    TimeGrid tg = TimeGrid::make(0.0, 3.0, 100);
    ParameterPoint a = delay_system();
    a.c0[0] = parse_expr("0.2 + 0.1*sin(t)");   // non-autonomous coupling
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, tg.steps_per_delay);
    Trajectory u = solve_marching(a, fam, h);
    CHECK(translation_check(u, a, fam, 0.5) < 1e-8);
    CHECK(translation_check(u, a, fam, 1.5) < 1e-8);
    CHECK(translation_check(u, a, fam, 0.0) < 1e-12);
}

TEST_CASE("solution satisfies the integral equation") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 32);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 64);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, tg.steps_per_delay);
    Trajectory u = solve_marching(a, fam, h);
    for (double t : {0.5, 1.0, 1.5, 2.0})
        CHECK(integral_residual(u, a, fam, h, t) < 1e-10);
}

TEST_CASE("contraction map fixes the solution offset") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 24);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 50);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    long S = tg.steps_per_delay;
    HistorySegment h = sine_history(g, S);
    Trajectory u = solve_marching(a, fam, h);

    // v = u - free term solves v = G(v)
    Trajectory v;
    v.time_grid = TimeGrid::make(tg.t0, tg.T, S);
    GridFunction w = h.head;
    for (long m = 0; m <= tg.steps; ++m) {
        GridFunction d = u.states[S + m];
        d.axpy(-1.0, w);
        v.states.push_back(std::move(d));
        if (m < tg.steps) w = fam.step(m, w);
    }
    Trajectory gv = gothic_g_apply(a, fam, h, v);
    double worst = 0.0;
    for (size_t j = 0; j < v.states.size(); ++j) {
        GridFunction d = gv.states[j];
        d.axpy(-1.0, v.states[j]);
        worst = std::max(worst, lp_norm(d, kInf));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("weighted metric and norm-agnostic trajectories") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 24);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 50);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, tg.steps_per_delay);

    // the discrete trajectory does not depend on the metric exponent p
    PicardConfig c1, c2;
    c1.p = 1.0;
    c2.p = kInf;
    Trajectory t1 = solve_picard(a, fam, h, c1).trajectory;
    Trajectory t2 = solve_picard(a, fam, h, c2).trajectory;
    CHECK(traj_gap(t1, t2, kInf) < 1e-9);

    // weighted metric basics
    CHECK(weighted_metric(t1, t2, 3.0, 2.0) <= weighted_metric(t1, t2, 0.0, 2.0));
    CHECK(weighted_metric(t1, t1, 1.0, 2.0) == 0.0);
}

TEST_CASE("picard rejects an impossible iteration budget") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 16);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 20);
    ParameterPoint a = delay_system();
    EvolutionFamily fam(a, g, tg);
    HistorySegment h = sine_history(g, tg.steps_per_delay);
    PicardConfig cfg;
    cfg.max_iters = 1;
    cfg.adaptive = false;
    CHECK_THROWS_AS(solve_picard(a, fam, h, cfg), std::runtime_error);
}
