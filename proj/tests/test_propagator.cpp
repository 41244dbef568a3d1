#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pdde/propagator.hpp"

using namespace pdde;

namespace {
constexpr double pi = 3.14159265358979323846;

GridFunction random_field(const SpatialGrid& g, int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction u(g, n);
    for (double& v : u.raw()) v = dist(rng);
    return u;
}
}  // namespace

TEST_CASE("heat equation decays at the discrete eigenrate") {
    SpatialGrid g = SpatialGrid::interval(0.0, pi, 128);
    TimeGrid tg = TimeGrid::make(0.0, 0.5, 400);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    EvolutionFamily fam(a, g, tg);

    GridFunction u(g, 1);
    for (int i = 0; i < 128; ++i) u.at(0, i) = std::sin(g.coord(0, i));

    // sin(x) at cell centers is an exact eigenvector of the ghost-folded
    // second difference with eigenvalue (2/h^2)(1 - cos h)
    double h = g.spacing(0);
    double lam = 2.0 / (h * h) * (1.0 - std::cos(h));
    CHECK(lam == doctest::Approx(1.0).epsilon(1e-3));

    GridFunction v = fam.propagate(0.0, 0.5, u);
    for (int i = 0; i < 128; i += 17)
        CHECK(v.at(0, i) == doctest::Approx(std::exp(-lam * 0.5) * u.at(0, i)).epsilon(1e-5));
}

TEST_CASE("Neumann conserves mass, Dirichlet loses it, Robin leaks at rate d0") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 40);
    TimeGrid tg = TimeGrid::make(0.0, 0.5, 100);
    GridFunction u(g, 1);
    for (int i = 0; i < 40; ++i) u.at(0, i) = 1.0 + 0.2 * std::cos(pi * g.coord(0, i));
    double mass0 = 0.0;
    for (int i = 0; i < 40; ++i) mass0 += u.at(0, i) * g.cell_volume();

    auto mass_after = [&](ParameterPoint a) {
        EvolutionFamily fam(a, g, tg);
        GridFunction v = fam.propagate(0.0, 0.5, u);
        double m = 0.0;
        for (int i = 0; i < 40; ++i) m += v.at(0, i) * g.cell_volume();
        return m;
    };

    CHECK(mass_after(ParameterPoint::laplace(1, 1, BcKind::neumann)) ==
          doctest::Approx(mass0).epsilon(1e-12));
    CHECK(mass_after(ParameterPoint::laplace(1, 1, BcKind::dirichlet)) < 0.5 * mass0);

    ParameterPoint rob = ParameterPoint::laplace(1, 1, BcKind::robin);
    rob.d0[0] = parse_expr("0.5");
    double m_rob = mass_after(rob);
    CHECK(m_rob < mass0);
    CHECK(m_rob > mass_after(ParameterPoint::laplace(1, 1, BcKind::dirichlet)));
}

TEST_CASE("one step is positivity preserving for implicit Euler") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 30);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 50);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.b_first[0] = parse_expr("0.5");
    EvolutionFamily fam(a, g, tg, Scheme::implicit_euler);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    GridFunction u(g, 1);
    for (double& v : u.raw()) v = dist(rng);
    GridFunction v = fam.step(0, u);
    for (int i = 0; i < 30; ++i) CHECK(v.at(0, i) >= -1e-14);
}

TEST_CASE("cocycle identities hold to round-off") {
    SpatialGrid g = SpatialGrid::interval(0.0, 2.0, 32);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 64);
    ParameterPoint a = ParameterPoint::laplace(2, 1, BcKind::dirichlet);
    a.aij(1, 0, 0) = parse_expr("1 + 0.5*sin(t + x1)");   // time-dependent family
    a.b_first[0] = parse_expr("0.3*cos(t)");
    EvolutionFamily fam(a, g, tg);

    std::mt19937 rng(17);
    std::uniform_int_distribution<long> node(0, tg.steps);
    for (int trial = 0; trial < 20; ++trial) {
        long j[3] = {node(rng), node(rng), node(rng)};
        std::sort(j, j + 3);
        GridFunction u = random_field(g, 2, rng);
        double res = fam.cocycle_check(tg.time(j[0]), tg.time(j[1]), tg.time(j[2]), u);
        CHECK(res <= 1e-12 * lp_norm(u, 2.0));
    }
    // U(s, s) = Id
    GridFunction u = random_field(g, 2, rng);
    GridFunction v = fam.propagate(0.5, 0.5, u);
    v.axpy(-1.0, u);
    CHECK(lp_norm(v, kInf) == 0.0);
}

TEST_CASE("transpose adjoint satisfies the duality identity exactly") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 24);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 40);
    ParameterPoint a = ParameterPoint::laplace(2, 1, BcKind::neumann);
    a.aij(0, 0, 0) = parse_expr("1 + 0.3*sin(2*t)");
    a.a_first[0] = parse_expr("0.2");
    a.b_first[1] = parse_expr("-0.4*x1");
    EvolutionFamily fam(a, g, tg);

    std::mt19937 rng(23);
    std::uniform_int_distribution<long> node(0, tg.steps);
    for (int trial = 0; trial < 50; ++trial) {
        long j0 = node(rng), j1 = node(rng);
        if (j0 > j1) std::swap(j0, j1);
        double s = tg.time(j0), t = tg.time(j1);
        GridFunction u = random_field(g, 2, rng);
        GridFunction v = random_field(g, 2, rng);
        double lhs = duality_pairing(fam.propagate(s, t, u), v);
        double rhs = duality_pairing(u, fam.adjoint_propagate(s, t, v));
        CHECK(std::abs(lhs - rhs) <=
              1e-10 * lp_norm(u, 2.0) * lp_norm(v, 2.0) + 1e-14);
    }
}

TEST_CASE("rediscretized adjoint agrees with the transpose") {
    // self-adjoint autonomous benchmark: both adjoints coincide to round-off
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 32);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 50);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.aij(0, 0, 0) = parse_expr("1 + 0.5*x1");
    EvolutionFamily fam(a, g, tg);
    std::mt19937 rng(5);
    GridFunction v = random_field(g, 1, rng);
    GridFunction tr = fam.adjoint_propagate(0.2, 0.8, v);
    GridFunction re = fam.adjoint_propagate(0.2, 0.8, v, AdjointMode::rediscretize);
    re.axpy(-1.0, tr);
    CHECK(lp_norm(re, kInf) < 1e-12);

    // drift benchmark: rediscretization flips the drift sign, agreement
    // is first order in dt
    ParameterPoint b = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    b.b_first[0] = parse_expr("0.6");
    double prev = kInf;
    for (long steps : {50L, 100L, 200L}) {
        TimeGrid tgs = TimeGrid::make(0.0, 1.0, steps);
        EvolutionFamily famb(b, g, tgs);
        GridFunction t2 = famb.adjoint_propagate(0.0, 1.0, v);
        GridFunction r2 = famb.adjoint_propagate(0.0, 1.0, v, AdjointMode::rediscretize);
        r2.axpy(-1.0, t2);
        double gap = lp_norm(r2, 2.0);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("quadratic form of the assembled operator is coercive") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 20);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    SparseMat L = assemble_form(a, 0, 0.0, g);
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> u(20);
        for (double& x : u) x = dist(rng);
        CHECK(quadratic_form(L, g, u, u) >= 0.0);
    }
    // symmetric for pure diffusion
    std::vector<double> u(20), w(20);
    for (double& x : u) x = dist(rng);
    for (double& x : w) x = dist(rng);
    CHECK(quadratic_form(L, g, u, w) == doctest::Approx(quadratic_form(L, g, w, u)));
}

TEST_CASE("2D mixed-derivative operator stays symmetric and elliptic") {
    SpatialGrid g = SpatialGrid::rectangle(0, 1, 0, 1, 12, 12);
    ParameterPoint a = ParameterPoint::laplace(1, 2, BcKind::dirichlet);
    a.aij(0, 0, 1) = parse_expr("0.4");
    a.aij(0, 1, 0) = parse_expr("0.4");
    SparseMat L = assemble_form(a, 0, 0.0, g);
    // the cross stencil is symmetric away from the boundary (ghost folding
    // perturbs boundary rows at first order)
    SparseMat D = SparseMat(L.transpose()) - L;
    auto interior = [&](int node) {
        int ix = node % g.cells[0], iy = node / g.cells[0];
        return ix > 0 && iy > 0 && ix < g.cells[0] - 1 && iy < g.cells[1] - 1;
    };
    double worst = 0.0;
    for (int c = 0; c < D.outerSize(); ++c)
        for (SparseMat::InnerIterator it(D, c); it; ++it)
            if (interior(it.row()) && interior(it.col()))
                worst = std::max(worst, std::abs(it.value()));
    CHECK(worst < 1e-13);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> u(g.num_nodes());
        for (double& x : u) x = dist(rng);
        CHECK(quadratic_form(L, g, u, u) >= -1e-12);
    }
}

TEST_CASE("estimated envelope covers measured growth") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 32);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 64);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::neumann);
    a.b_first[0] = parse_expr("0.3");
    EvolutionFamily fam(a, g, tg);
    MGammaFit f = fam.estimate_M_gamma(2.0, 2.0, 16);
    CHECK(f.M >= 1.0);
    CHECK(f.gamma >= 0.0);
    // the envelope must dominate a fresh probe measurement
    std::mt19937 rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        GridFunction u = random_field(g, 1, rng);
        for (double t : {0.25, 1.0, 2.0}) {
            double ratio = lp_norm(fam.propagate(0.0, t, u), 2.0) / lp_norm(u, 2.0);
            CHECK(ratio <= f.M * std::exp(f.gamma * t) * (1 + 1e-6));
        }
    }
    // contractive Dirichlet diffusion fits a flat envelope
    EvolutionFamily dir(ParameterPoint::laplace(1, 1, BcKind::dirichlet), g, tg);
    MGammaFit fd = dir.estimate_M_gamma(2.0, 2.0, 16);
    CHECK(fd.gamma == doctest::Approx(0.0));
    CHECK(fd.M == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("p-q smoothing estimate is observed for the fitted exponent") {
    SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 256);
    TimeGrid tg = TimeGrid::make(0.0, 0.02, 20000);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    EvolutionFamily fam(a, g, tg);
    GridFunction spike(g, 1);
    spike.at(0, 128) = 1.0 / g.cell_volume();
    // ||U(t,0)||_{1->inf} ~ t^{-1/2}: doubling t shrinks the ratio by ~sqrt(2)
    double r1 = lp_norm(fam.propagate(0.0, tg.dt() * 40, spike), kInf);
    double r2 = lp_norm(fam.propagate(0.0, tg.dt() * 160, spike), kInf);
    CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.08));
}
