#include "pdde/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdde {

BcKind bc_from_string(const std::string& s) {
    if (s == "dirichlet") return BcKind::dirichlet;
    if (s == "neumann") return BcKind::neumann;
    if (s == "robin") return BcKind::robin;
    throw std::invalid_argument("unknown boundary condition '" + s + "'");
}

std::string bc_to_string(BcKind k) {
    switch (k) {
        case BcKind::dirichlet: return "dirichlet";
        case BcKind::neumann: return "neumann";
        case BcKind::robin: return "robin";
    }
    return "?";
}

ParameterPoint ParameterPoint::laplace(int n, int N, BcKind kind) {
    ParameterPoint a;
    a.n = n;
    a.N = N;
    a.a_second.assign(static_cast<size_t>(n) * N * N, CoeffExpr(0.0));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < N; ++i) a.aij(k, i, i) = CoeffExpr(1.0);
    a.a_first.assign(static_cast<size_t>(n) * N, CoeffExpr(0.0));
    a.b_first.assign(static_cast<size_t>(n) * N, CoeffExpr(0.0));
    a.c0.assign(static_cast<size_t>(n) * n, CoeffExpr(0.0));
    a.c1.assign(static_cast<size_t>(n) * n, CoeffExpr(0.0));
    a.d0.assign(static_cast<size_t>(n), CoeffExpr(0.0));
    a.bc.assign(static_cast<size_t>(n), kind);
    a.alpha0 = 1.0;
    a.K_bound = 1.0;
    return a;
}

bool ParameterPoint::has_coupling() const {
    auto nonzero = [](const CoeffExpr& e) {
        return e.depends_on_time() || e.depends_on_space() || e.eval(0, 0, 0) != 0.0;
    };
    return std::any_of(c0.begin(), c0.end(), nonzero) ||
           std::any_of(c1.begin(), c1.end(), nonzero);
}

bool ParameterPoint::coupling_time_dependent() const {
    auto dep = [](const CoeffExpr& e) { return e.depends_on_time(); };
    return std::any_of(c0.begin(), c0.end(), dep) || std::any_of(c1.begin(), c1.end(), dep);
}

bool ParameterPoint::higher_order_time_dependent() const {
    auto dep = [](const CoeffExpr& e) { return e.depends_on_time(); };
    return std::any_of(a_second.begin(), a_second.end(), dep) ||
           std::any_of(a_first.begin(), a_first.end(), dep) ||
           std::any_of(b_first.begin(), b_first.end(), dep) ||
           std::any_of(d0.begin(), d0.end(), dep);
}

double matrix_norm(const MatrixSample& g, int n, double xi, double eta) {
    if (!(xi >= 1.0) || !(eta >= 1.0))
        throw std::invalid_argument("matrix_norm: exponents must be >= 1");
    auto inner = [&](int k) {
        if (std::isinf(xi)) {
            double m = 0.0;
            for (int l = 0; l < n; ++l) m = std::max(m, std::abs(g[k * n + l]));
            return m;
        }
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += std::pow(std::abs(g[k * n + l]), xi);
        return std::pow(acc, 1.0 / xi);
    };
    if (std::isinf(eta)) {
        double m = 0.0;
        for (int k = 0; k < n; ++k) m = std::max(m, inner(k));
        return m;
    }
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += std::pow(inner(k), eta);
    return std::pow(acc, 1.0 / eta);
}

MatrixSample sample_coupling_matrix(const ParameterPoint& a, int which, double t,
                                    const SpatialGrid& grid) {
    MatrixSample g(static_cast<size_t>(a.n) * a.n, 0.0);
    for (int k = 0; k < a.n; ++k)
        for (int l = 0; l < a.n; ++l) {
            const CoeffExpr& e = a.c(which, k, l);
            double sup = 0.0;
            if (!e.depends_on_space()) {
                sup = std::abs(e.eval(t, 0.0, 0.0));
            } else {
                for (int iy = 0; iy < grid.cells[1]; ++iy)
                    for (int ix = 0; ix < grid.cells[0]; ++ix)
                        sup = std::max(sup, std::abs(e.eval(t, grid.coord(0, ix),
                                                            grid.dim == 2 ? grid.coord(1, iy) : 0.0)));
            }
            g[k * a.n + l] = sup;
        }
    return g;
}

GridFunction apply_mult(const ParameterPoint& a, int which, double t,
                        const GridFunction& u) {
    if (u.components() != a.n)
        throw std::invalid_argument("apply_mult: component count mismatch");
    const SpatialGrid& grid = u.grid();
    GridFunction out(grid, a.n);
    int nodes = grid.num_nodes();
    for (int k = 0; k < a.n; ++k) {
        double* dst = out.component(k);
        for (int l = 0; l < a.n; ++l) {
            const CoeffExpr& e = a.c(which, k, l);
            const double* src = u.component(l);
            if (!e.depends_on_space()) {
                double c = e.eval(t, 0.0, 0.0);
                if (c == 0.0) continue;
                for (int p = 0; p < nodes; ++p) dst[p] += c * src[p];
            } else {
                for (int iy = 0; iy < grid.cells[1]; ++iy) {
                    double x2 = grid.dim == 2 ? grid.coord(1, iy) : 0.0;
                    for (int ix = 0; ix < grid.cells[0]; ++ix) {
                        int p = grid.node(ix, iy);
                        dst[p] += e.eval(t, grid.coord(0, ix), x2) * src[p];
                    }
                }
            }
        }
    }
    return out;
}

namespace {

// deterministic space-time sample points: every node at a strided set of
// times, capped so validation stays cheap on fine runs
template <typename F>
void for_sampled(const SpatialGrid& grid, const TimeGrid& tg, F&& f) {
    long tstride = std::max<long>(1, tg.steps / 48);
    for (long j = 0; j <= tg.steps; j += tstride) {
        double t = tg.time(j);
        for (int iy = 0; iy < grid.cells[1]; ++iy) {
            double x2 = grid.dim == 2 ? grid.coord(1, iy) : 0.0;
            for (int ix = 0; ix < grid.cells[0]; ++ix)
                f(t, grid.coord(0, ix), x2);
        }
    }
}

double sampled_sup(const CoeffExpr& e, const SpatialGrid& grid, const TimeGrid& tg) {
    double sup = 0.0;
    for_sampled(grid, tg, [&](double t, double x1, double x2) {
        sup = std::max(sup, std::abs(e.eval(t, x1, x2)));
    });
    return sup;
}

}  // namespace

double sup_bound_K(const std::vector<ParameterPoint>& batch,
                   const SpatialGrid& grid, const TimeGrid& tg) {
    if (batch.empty()) throw std::invalid_argument("sup_bound_K: empty batch");
    double K = 0.0;
    for (const auto& a : batch) {
        for (const auto& e : a.c0) K = std::max(K, sampled_sup(e, grid, tg));
        for (const auto& e : a.c1) K = std::max(K, sampled_sup(e, grid, tg));
    }
    return K;
}

ParameterPoint weakstar_oscillate(const ParameterPoint& base, long m, double amp,
                                  bool time_mode) {
    ParameterPoint out = base;
    // m == 0 is the constant-shift negative control
    CoeffExpr shift = (m == 0) ? CoeffExpr(amp) : CoeffExpr::oscillation(amp, m, time_mode);
    for (auto& e : out.c0) e = CoeffExpr::add(e, shift);
    for (auto& e : out.c1) e = CoeffExpr::add(e, shift);
    return out;
}

void validate_parameter_point(const ParameterPoint& a, const SpatialGrid& grid,
                              const TimeGrid& tg) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    require(a.N == grid.dim, "DA1: parameter dimension does not match grid");
    require(grid.cell_volume() > 0.0 && grid.measure() > 0.0, "DA1: domain must be bounded with positive measure");
    require(a.n >= 1, "DA2: need at least one component");
    require(a.a_second.size() == static_cast<size_t>(a.n) * a.N * a.N &&
                a.a_first.size() == static_cast<size_t>(a.n) * a.N &&
                a.b_first.size() == static_cast<size_t>(a.n) * a.N &&
                a.c0.size() == static_cast<size_t>(a.n) * a.n &&
                a.c1.size() == static_cast<size_t>(a.n) * a.n &&
                a.d0.size() == static_cast<size_t>(a.n) &&
                a.bc.size() == static_cast<size_t>(a.n),
            "DA2: coefficient field shapes do not match (n, N)");
    require(a.alpha0 > 0.0, "DA4: ellipticity constant alpha0 must be positive");
    require(a.K_bound >= 0.0, "DA3: K bound must be nonnegative");

    // DA2: essential boundedness -- every sampled value finite
    auto check_finite = [&](const CoeffExpr& e, const char* name) {
        for_sampled(grid, tg, [&](double t, double x1, double x2) {
            if (!std::isfinite(e.eval(t, x1, x2)))
                throw std::invalid_argument(std::string("DA2: coefficient ") + name +
                                            " is not finite on the space-time box");
        });
    };
    for (const auto& e : a.a_second) check_finite(e, "a_ij");
    for (const auto& e : a.a_first) check_finite(e, "a_i");
    for (const auto& e : a.b_first) check_finite(e, "b_i");
    for (const auto& e : a.c0) check_finite(e, "c0");
    for (const auto& e : a.c1) check_finite(e, "c1");

    // DA3: coupling bounded by the declared K; d0 sign and support
    for (int which = 0; which < 2; ++which)
        for (const auto& e : which == 0 ? a.c0 : a.c1)
            require(sampled_sup(e, grid, tg) <= a.K_bound + 1e-12,
                    "DA3: coupling coefficient exceeds the declared K bound");
    for (int k = 0; k < a.n; ++k) {
        if (a.bc[k] == BcKind::robin) {
            for_sampled(grid, tg, [&](double t, double x1, double x2) {
                if (a.d0[k].eval(t, x1, x2) < 0.0)
                    throw std::invalid_argument("DA3: Robin coefficient d0 must be nonnegative");
            });
        }
    }

    // DA4: symmetry and uniform ellipticity, sampled over the signed
    // coordinate and diagonal directions; in 2D additionally the exact
    // 2x2 eigenvalue bound
    std::vector<std::array<double, 2>> dirs;
    if (a.N == 1) {
        dirs = {{1.0, 0.0}, {-1.0, 0.0}};
    } else {
        const double s = std::sqrt(0.5);
        dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {s, s}, {-s, -s}, {s, -s}, {-s, s}};
    }
    for (int k = 0; k < a.n; ++k) {
        for_sampled(grid, tg, [&](double t, double x1, double x2) {
            double A[2][2] = {{0, 0}, {0, 0}};
            for (int i = 0; i < a.N; ++i)
                for (int j = 0; j < a.N; ++j) A[i][j] = a.aij(k, i, j).eval(t, x1, x2);
            if (a.N == 2 && std::abs(A[0][1] - A[1][0]) > 1e-10)
                throw std::invalid_argument("DA4: diffusion matrix must be symmetric");
            for (const auto& xi : dirs) {
                double q = 0.0, nn = 0.0;
                for (int i = 0; i < a.N; ++i) {
                    nn += xi[i] * xi[i];
                    for (int j = 0; j < a.N; ++j) q += A[i][j] * xi[i] * xi[j];
                }
                if (q < a.alpha0 * nn - 1e-10)
                    throw std::invalid_argument("DA4: ellipticity bound violated at a sampled node");
            }
            if (a.N == 2) {
                double tr = A[0][0] + A[1][1];
                double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
                double lmin = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
                if (lmin < a.alpha0 - 1e-10)
                    throw std::invalid_argument("DA4: ellipticity bound violated at a sampled node");
            }
        });
    }

    // DA5 holds by construction: study sequences perturb only c0/c1.
}

}  // namespace pdde
