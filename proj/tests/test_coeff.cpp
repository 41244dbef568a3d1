#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "pdde/coeff.hpp"

using namespace pdde;

TEST_CASE("mixed matrix norms on a fixed 2x2 sample") {
    // g = [[1,2],[3,4]] (entrywise absolute values)
    MatrixSample g{1, 2, 3, 4};
    CHECK(matrix_norm(g, 2, 1.0, 1.0) == doctest::Approx(10.0));
    CHECK(matrix_norm(g, 2, kInf, kInf) == doctest::Approx(4.0));
    CHECK(matrix_norm(g, 2, 1.0, kInf) == doctest::Approx(7.0));   // max row sum
    CHECK(matrix_norm(g, 2, kInf, 1.0) == doctest::Approx(6.0));   // sum of row maxima
    CHECK(matrix_norm(g, 2, 2.0, 2.0) == doctest::Approx(std::sqrt(30.0)));
    // mixed finite exponents
    double inner0 = std::pow(1.0 + 8.0, 1.0 / 3.0);
    double inner1 = std::pow(27.0 + 64.0, 1.0 / 3.0);
    CHECK(matrix_norm(g, 2, 3.0, 2.0) ==
          doctest::Approx(std::sqrt(inner0 * inner0 + inner1 * inner1)));
    CHECK_THROWS_AS(matrix_norm(g, 2, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("matrix norm dominated by the (1,1) norm") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + trial % 4;
        MatrixSample g(n * n);
        for (double& v : g) v = dist(rng);
        double full = matrix_norm(g, n, 1.0, 1.0);
        for (double xi : {1.0, 1.7, 2.0, 5.0, kInf})
            for (double eta : {1.0, 2.0, 3.0, kInf})
                CHECK(matrix_norm(g, n, xi, eta) <= full * (1 + 1e-12));
    }
}

TEST_CASE("coupling matrix sampling takes sups over the grid") {
    SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 64);
    ParameterPoint a = ParameterPoint::laplace(2, 1, BcKind::dirichlet);
    a.c0[0 * 2 + 1] = parse_expr("x1*(1-x1)");      // sup 0.25 (attained off-node)
    a.c0[1 * 2 + 0] = parse_expr("-2");
    MatrixSample g = sample_coupling_matrix(a, 0, 0.0, grid);
    CHECK(g[1] == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(g[2] == doctest::Approx(2.0));
    CHECK(g[0] == doctest::Approx(0.0));
}

TEST_CASE("multiplication operator: linearity and norm bound") {
    SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 32);
    ParameterPoint a = ParameterPoint::laplace(2, 1, BcKind::dirichlet);
    a.c0[0] = parse_expr("sin(x1)");
    a.c0[1] = parse_expr("0.5*t");
    a.c0[2] = parse_expr("-1");
    a.c0[3] = parse_expr("x1");

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction u(grid, 2), v(grid, 2);
    for (double& x : u.raw()) x = dist(rng);
    for (double& x : v.raw()) x = dist(rng);

    GridFunction uv = u;
    uv.axpy(2.0, v);
    GridFunction lhs = apply_mult(a, 0, 1.0, uv);
    GridFunction rhs = apply_mult(a, 0, 1.0, u);
    rhs.axpy(2.0, apply_mult(a, 0, 1.0, v));
    rhs.axpy(-1.0, lhs);
    CHECK(lp_norm(rhs, kInf) < 1e-13);

    // || C u ||_p <= ||g||_{p',p} ... dominated by the coarse bound n ||g||_{inf,inf} ||u||_p
    MatrixSample g = sample_coupling_matrix(a, 0, 1.0, grid);
    double K = matrix_norm(g, 2, kInf, kInf);
    for (double p : {1.0, 2.0, kInf})
        CHECK(lp_norm(lhs, p) <= 2 * K * lp_norm(uv, p) * (1 + 1e-12));
}

TEST_CASE("sup bound over a batch") {
    SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 16);
    TimeGrid tg = TimeGrid::make(0.0, 2.0, 24);
    ParameterPoint a = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    a.c0[0] = parse_expr("0.5*sin(3*t)");
    a.c1[0] = parse_expr("-0.25");
    ParameterPoint b = a;
    b.c1[0] = parse_expr("0.7*x1");
    double K = sup_bound_K({a, b}, grid, tg);
    CHECK(K >= 0.5 - 1e-6);
    CHECK(K <= 0.7 + 1e-12);
    CHECK(K == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("weak-* oscillation generator") {
    ParameterPoint base = ParameterPoint::laplace(2, 1, BcKind::dirichlet);
    base.c0[0] = parse_expr("0.3");
    base.c1[3] = parse_expr("-0.1");

    ParameterPoint osc = weakstar_oscillate(base, 4, 0.05, true);
    // all c0/c1 entries are shifted by the same oscillation
    for (int e = 0; e < 4; ++e) {
        double t_peak = 1.0 / 16.0;   // sin(2 pi 4 t) = 1
        CHECK(osc.c0[e].eval(t_peak, 0.5) ==
              doctest::Approx(base.c0[e].eval(t_peak, 0.5) + 0.05).epsilon(1e-12));
        CHECK(osc.c1[e].eval(t_peak, 0.5) ==
              doctest::Approx(base.c1[e].eval(t_peak, 0.5) + 0.05).epsilon(1e-12));
    }
    // higher-order coefficients untouched
    CHECK(osc.a_second[0].eval(0, 0.5) == doctest::Approx(1.0));

    // m = 0 is the constant-shift negative control
    ParameterPoint ctrl = weakstar_oscillate(base, 0, 0.05, true);
    CHECK(ctrl.c0[0].eval(0.123, 0.5) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK_FALSE(ctrl.c0[0].depends_on_time());

    // oscillation mean over one period is ~0 (weak-* null sequence)
    double mean = 0.0;
    int steps = 1000;
    for (int i = 0; i < steps; ++i)
        mean += osc.c0[0].eval((i + 0.5) / (4.0 * steps), 0.5) - 0.3;
    CHECK(std::abs(mean / steps) < 1e-6);
}

TEST_CASE("validation accepts the stock configurations") {
    SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 8);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 8);
    for (BcKind bc : {BcKind::dirichlet, BcKind::neumann}) {
        ParameterPoint a = ParameterPoint::laplace(2, 1, bc);
        CHECK_NOTHROW(validate_parameter_point(a, grid, tg));
    }
    SpatialGrid g2 = SpatialGrid::rectangle(0, 1, 0, 1, 6, 6);
    ParameterPoint a2 = ParameterPoint::laplace(1, 2, BcKind::robin);
    a2.d0[0] = parse_expr("1+x1");
    CHECK_NOTHROW(validate_parameter_point(a2, g2, tg));
}

TEST_CASE("validation rejects each broken assumption by name") {
    SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 8);
    SpatialGrid g2 = SpatialGrid::rectangle(0, 1, 0, 1, 6, 6);
    TimeGrid tg = TimeGrid::make(0.0, 1.0, 8);

    auto expect_code = [&](const ParameterPoint& a, const SpatialGrid& g,
                           const std::string& code) {
        try {
            validate_parameter_point(a, g, tg);
            FAIL("expected rejection: ", code);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(code) == 0);
        }
    };

    // shape mismatch
    ParameterPoint bad = ParameterPoint::laplace(2, 1, BcKind::dirichlet);
    bad.c0.pop_back();
    expect_code(bad, grid, "DA2");

    // lost ellipticity
    ParameterPoint flat = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    flat.a_second[0] = parse_expr("x1 - 0.5");
    expect_code(flat, grid, "DA4");

    // asymmetric mixed second-order entries
    ParameterPoint asym = ParameterPoint::laplace(1, 2, BcKind::dirichlet);
    asym.aij(0, 0, 1) = parse_expr("0.3");
    asym.aij(0, 1, 0) = parse_expr("-0.3");
    expect_code(asym, g2, "DA4");

    // 2D ellipticity with dominant mixed entry
    ParameterPoint mixed = ParameterPoint::laplace(1, 2, BcKind::dirichlet);
    mixed.aij(0, 0, 1) = parse_expr("1.5");
    mixed.aij(0, 1, 0) = parse_expr("1.5");
    expect_code(mixed, g2, "DA4");

    // unbounded (non-finite) coefficient
    ParameterPoint nanc = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    nanc.c0[0] = parse_expr("1/(x1 - x1)");
    expect_code(nanc, grid, "DA2");

    // declared K bound exceeded by the sampled sup
    ParameterPoint loud = ParameterPoint::laplace(1, 1, BcKind::dirichlet);
    loud.c0[0] = parse_expr("2");
    loud.K_bound = 1.0;
    expect_code(loud, grid, "DA3");

    // negative Robin feedback
    ParameterPoint rob = ParameterPoint::laplace(1, 1, BcKind::robin);
    rob.d0[0] = parse_expr("-1");
    expect_code(rob, grid, "DA3");
}
