#include "pdde/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace pdde {

namespace {

struct TriLU {
    // LU factors of a tridiagonal matrix (no pivoting; rows are
    // diagonally dominant for the schemes and dt ranges we use)
    std::vector<double> l;      // multipliers, l[0] unused
    std::vector<double> d;      // modified diagonal
    std::vector<double> u;      // original superdiagonal

    void factor(const std::vector<double>& sub, const std::vector<double>& diag,
                const std::vector<double>& sup) {
        size_t n = diag.size();
        l.assign(n, 0.0);
        d = diag;
        u = sup;
        for (size_t i = 1; i < n; ++i) {
            l[i] = sub[i] / d[i - 1];
            d[i] = diag[i] - l[i] * u[i - 1];
        }
    }

    void solve(Eigen::VectorXd& x) const {
        size_t n = d.size();
        for (size_t i = 1; i < n; ++i) x[i] -= l[i] * x[i - 1];
        x[n - 1] /= d[n - 1];
        for (size_t i = n - 1; i-- > 0;) x[i] = (x[i] - u[i] * x[i + 1]) / d[i];
    }

    // solve with the transposed matrix: A = LU => A^T = U^T L^T
    void solve_transposed(Eigen::VectorXd& x) const {
        size_t n = d.size();
        x[0] /= d[0];
        for (size_t i = 1; i < n; ++i) x[i] = (x[i] - u[i - 1] * x[i - 1]) / d[i];
        for (size_t i = n - 1; i-- > 0;) x[i] -= l[i + 1] * x[i + 1];
    }
};

ParameterPoint adjoint_parameter(const ParameterPoint& a) {
    ParameterPoint out = a;
    for (int k = 0; k < a.n; ++k) {
        for (int i = 0; i < a.N; ++i) {
            for (int j = 0; j < a.N; ++j) out.aij(k, i, j) = a.aij(k, j, i);
            out.a_first[k * a.N + i] =
                CoeffExpr::mul(CoeffExpr(-1.0), a.b_first[k * a.N + i]);
            out.b_first[k * a.N + i] =
                CoeffExpr::mul(CoeffExpr(-1.0), a.a_first[k * a.N + i]);
        }
    }
    return out;
}

// e'(t, x) := e(shift - t, x)
CoeffExpr reverse_time(const CoeffExpr& e, double shift) {
    return CoeffExpr::with_reversed_time(e, shift);
}

ParameterPoint reverse_time(const ParameterPoint& a, double shift) {
    ParameterPoint out = a;
    auto rev = [&](std::vector<CoeffExpr>& v) {
        for (auto& e : v) e = reverse_time(e, shift);
    };
    rev(out.a_second);
    rev(out.a_first);
    rev(out.b_first);
    rev(out.c0);
    rev(out.c1);
    rev(out.d0);
    return out;
}

}  // namespace

// --- assembly -----------------------------------------------------------

namespace {

// fold an out-of-range node reference back into the domain according to
// the ghost rule of the component's boundary condition: Dirichlet
// reflects with sign flip, Neumann/Robin reflects without
void fold_entry(const SpatialGrid& g, BcKind kind, int ix, int iy, double coef,
                std::vector<Eigen::Triplet<double>>& out) {
    double s = 1.0;
    auto reflect = [&](int i, int cells) {
        if (i < 0) i = -1 - i;
        else if (i >= cells) i = 2 * cells - 1 - i;
        else return i;
        if (kind == BcKind::dirichlet) s = -s;
        return i;
    };
    ix = reflect(ix, g.cells[0]);
    if (g.dim == 2) iy = reflect(iy, g.cells[1]);
    out.emplace_back(0, g.node(ix, iy), s * coef);   // row filled in later
}

}  // namespace

SparseMat assemble_form(const ParameterPoint& a, int k, double t,
                        const SpatialGrid& grid) {
    const int N = grid.dim;
    const int nodes = grid.num_nodes();
    const BcKind kind = a.bc[k];
    const double h0 = grid.spacing(0);
    const double h1 = N == 2 ? grid.spacing(1) : 1.0;

    // quick ellipticity guard at assembly time
    {
        double a00 = a.aij(k, 0, 0).eval(t, grid.coord(0, grid.cells[0] / 2),
                                         N == 2 ? grid.coord(1, grid.cells[1] / 2) : 0.0);
        if (a00 < a.alpha0 - 1e-12)
            throw std::invalid_argument("DA4: ellipticity violated at assembly time");
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(nodes) * (N == 1 ? 3 : 9));
    std::vector<Eigen::Triplet<double>> local;

    auto add = [&](int row, int ix, int iy, double coef) {
        local.clear();
        fold_entry(grid, kind, ix, iy, coef, local);
        for (auto& tr : local) trip.emplace_back(row, tr.col(), tr.value());
    };

    auto coordv = [&](int axis, double idx) {   // idx may be half-integer
        return grid.lo[axis] + (idx + 0.5) * grid.spacing(axis);
    };

    for (int iy = 0; iy < grid.cells[1]; ++iy) {
        double y = N == 2 ? grid.coord(1, iy) : 0.0;
        for (int ix = 0; ix < grid.cells[0]; ++ix) {
            int row = grid.node(ix, iy);
            double x = grid.coord(0, ix);

            // fluxes in each direction; L contributes -(F_+ - F_-)/h
            for (int dir = 0; dir < N; ++dir) {
                int ci = dir == 0 ? ix : iy;
                int cmax = grid.cells[dir];
                double h = dir == 0 ? h0 : h1;
                for (int side = 0; side < 2; ++side) {   // 0: -face, 1: +face
                    double sgn = side == 1 ? -1.0 : 1.0;  // contribution of F to -(F_+ - F_-)/h
                    bool at_boundary = (side == 0 && ci == 0) || (side == 1 && ci == cmax - 1);
                    double fx = dir == 0 ? coordv(0, ix + (side == 1 ? 0.5 : -0.5)) : x;
                    double fy = dir == 1 ? coordv(1, iy + (side == 1 ? 0.5 : -0.5)) : y;

                    if (at_boundary && kind != BcKind::dirichlet) {
                        // flux substitution: F . nu = -d0 u(face)
                        double dval = a.d0[k].eval(t, fx, N == 2 ? fy : 0.0);
                        trip.emplace_back(row, row, dval / h);
                        continue;
                    }

                    int nx = ix + (dir == 0 ? (side == 1 ? 1 : -1) : 0);
                    int ny = iy + (dir == 1 ? (side == 1 ? 1 : -1) : 0);

                    double add_diag = a.aij(k, dir, dir).eval(t, fx, N == 2 ? fy : 0.0);
                    double add_first = a.ai(k, dir).eval(t, fx, N == 2 ? fy : 0.0);
                    // F_diag = a_dd (u_out - u_in)/h * (side ? +1 : -1) + a_d (u_out + u_in)/2
                    double grad_sign = side == 1 ? 1.0 : -1.0;
                    // -(F)/h with sign per side
                    add(row, nx, ny, sgn / h * (grad_sign * add_diag / h + 0.5 * add_first));
                    add(row, ix, iy, sgn / h * (-grad_sign * add_diag / h + 0.5 * add_first));

                    if (N == 2) {
                        // mixed flux a_{dir,other} * d_other u at the face center
                        int od = 1 - dir;
                        double aod = a.aij(k, dir, od).eval(t, fx, fy);
                        if (aod != 0.0) {
                            double ho = od == 0 ? h0 : h1;
                            int oxs = od == 0 ? 1 : 0;
                            int oys = od == 0 ? 0 : 1;
                            double w = sgn / h * aod / (4.0 * ho);
                            add(row, ix + oxs, iy + oys, w);
                            add(row, nx + oxs, ny + oys, w);
                            add(row, ix - oxs, iy - oys, -w);
                            add(row, nx - oxs, ny - oys, -w);
                        }
                    }
                }
            }

            // -b_i du/dx_i, centered with ghost folding
            for (int dir = 0; dir < N; ++dir) {
                double h = dir == 0 ? h0 : h1;
                double b = a.bi(k, dir).eval(t, x, N == 2 ? y : 0.0);
                if (b != 0.0) {
                    int sx = dir == 0 ? 1 : 0;
                    int sy = dir == 1 ? 1 : 0;
                    add(row, ix + sx, iy + sy, -b / (2.0 * h));
                    add(row, ix - sx, iy - sy, b / (2.0 * h));
                }
            }
        }
    }

    SparseMat L(nodes, nodes);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

double quadratic_form(const SparseMat& L, const SpatialGrid& grid,
                      const std::vector<double>& u, const std::vector<double>& v) {
    Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<long>(u.size()));
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<long>(v.size()));
    return grid.cell_volume() * vv.dot(L * uv);
}

// --- evolution family ---------------------------------------------------

struct EvolutionFamily::StepOps {
    SparseMat E;                     // explicit part, I - dt(1-theta) L(t_j)
    bool identity_E = false;
    bool tridiag = false;
    TriLU tri;                       // 1D implicit solve
    std::unique_ptr<Eigen::SparseLU<SparseMat>> lu;   // 2D implicit solve
    SparseMat A;                     // implicit matrix (kept for the 2D transpose path)
};

EvolutionFamily::EvolutionFamily(ParameterPoint a, SpatialGrid grid, TimeGrid tg,
                                 Scheme scheme)
    : param_(std::move(a)), grid_(grid), tg_(tg), scheme_(scheme),
      time_dependent_(param_.higher_order_time_dependent()) {}

const EvolutionFamily::StepOps& EvolutionFamily::ops_for(int k, long j) const {
    long key_j = time_dependent_ ? j : -1;
    std::pair<int, long> key{k, key_j};
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }

    auto ops = std::make_shared<StepOps>();
    double theta = scheme_ == Scheme::implicit_euler ? 1.0 : 0.5;
    double dt = tg_.dt();
    long jj = time_dependent_ ? j : 0;
    SparseMat Lnext = assemble_form(param_, k, tg_.time(jj + 1), grid_);
    SparseMat Lcur = time_dependent_ ? assemble_form(param_, k, tg_.time(jj), grid_) : Lnext;

    int nodes = grid_.num_nodes();
    SparseMat I(nodes, nodes);
    I.setIdentity();
    ops->A = I + (dt * theta) * Lnext;
    if (theta >= 1.0) {
        ops->identity_E = true;
    } else {
        ops->E = I - (dt * (1.0 - theta)) * Lcur;
    }

    if (grid_.dim == 1) {
        ops->tridiag = true;
        std::vector<double> sub(nodes, 0.0), diag(nodes, 0.0), sup(nodes, 0.0);
        for (int c = 0; c < ops->A.outerSize(); ++c)
            for (SparseMat::InnerIterator it(ops->A, c); it; ++it) {
                int r = static_cast<int>(it.row());
                if (r == c) diag[r] = it.value();
                else if (r == c + 1) sub[r] = it.value();
                else if (r == c - 1) sup[r] = it.value();
                else throw std::runtime_error("1D operator is not tridiagonal");
            }
        ops->tri.factor(sub, diag, sup);
    } else {
        ops->lu = std::make_unique<Eigen::SparseLU<SparseMat>>();
        ops->lu->compute(ops->A);
        if (ops->lu->info() != Eigen::Success)
            throw std::runtime_error("implicit step factorization failed");
    }

    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(ops));
    return *it->second;
}

void EvolutionFamily::step_component(int k, long j, Eigen::VectorXd& x) const {
    const StepOps& ops = ops_for(k, j);
    if (!ops.identity_E) x = ops.E * x;
    if (ops.tridiag) ops.tri.solve(x);
    else x = ops.lu->solve(x);
}

void EvolutionFamily::adjoint_step_component(int k, long j, Eigen::VectorXd& x) const {
    const StepOps& ops = ops_for(k, j);
    if (ops.tridiag) ops.tri.solve_transposed(x);
    else x = ops.lu->adjoint().solve(x);
    if (!ops.identity_E) x = ops.E.transpose() * x;
}

GridFunction EvolutionFamily::propagate(double s, double t, const GridFunction& u) const {
    long js = tg_.index_of(s);
    long jt = tg_.index_of(t);
    if (jt < js) throw std::invalid_argument("propagate: need s <= t");
    if (u.components() != param_.n || !u.grid().same_as(grid_))
        throw std::invalid_argument("propagate: field does not live on the family grid");
    GridFunction out = u;
    int nodes = grid_.num_nodes();
    for (int k = 0; k < param_.n; ++k) {
        Eigen::Map<Eigen::VectorXd> xmap(out.component(k), nodes);
        Eigen::VectorXd x = xmap;
        for (long j = js; j < jt; ++j) step_component(k, j, x);
        xmap = x;
    }
    return out;
}

GridFunction EvolutionFamily::step(long j, const GridFunction& u) const {
    GridFunction out = u;
    int nodes = grid_.num_nodes();
    for (int k = 0; k < param_.n; ++k) {
        Eigen::Map<Eigen::VectorXd> xmap(out.component(k), nodes);
        Eigen::VectorXd x = xmap;
        step_component(k, j, x);
        xmap = x;
    }
    return out;
}

GridFunction EvolutionFamily::adjoint_propagate(double s, double t, const GridFunction& v,
                                                AdjointMode mode) const {
    long js = tg_.index_of(s);
    long jt = tg_.index_of(t);
    if (jt < js) throw std::invalid_argument("adjoint_propagate: need s <= t");

    if (mode == AdjointMode::transpose) {
        GridFunction out = v;
        int nodes = grid_.num_nodes();
        for (int k = 0; k < param_.n; ++k) {
            Eigen::Map<Eigen::VectorXd> xmap(out.component(k), nodes);
            Eigen::VectorXd x = xmap;
            for (long j = jt - 1; j >= js; --j) adjoint_step_component(k, j, x);
            xmap = x;
        }
        return out;
    }

    // rediscretize: theta-scheme for the backward adjoint equation,
    // realized as a forward march in the reversed clock tau, where the
    // physical time is (t0 + T) - tau
    std::shared_ptr<EvolutionFamily> adj;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (!adjoint_family_) {
            ParameterPoint ap = adjoint_parameter(param_);
            ap = reverse_time(ap, tg_.t0 + tg_.T);
            adjoint_family_ = std::make_shared<EvolutionFamily>(ap, grid_, tg_, scheme_);
        }
        adj = adjoint_family_;
    }
    return adj->propagate(tg_.t0 + tg_.T - t, tg_.t0 + tg_.T - s, v);
}

double EvolutionFamily::cocycle_check(double s, double t1, double t2,
                                      const GridFunction& u, double p) const {
    GridFunction a = propagate(t1, t2, propagate(s, t1, u));
    GridFunction b = propagate(s, t2, u);
    a.axpy(-1.0, b);
    return lp_norm(a, p);
}

MGammaFit EvolutionFamily::estimate_M_gamma(double p, double q, int samples,
                                            unsigned seed) const {
    if (samples < 2) throw std::invalid_argument("estimate_M_gamma: insufficient samples");
    if (q < p) throw std::invalid_argument("estimate_M_gamma: need p <= q");
    double sigma = 0.5 * grid_.dim * (1.0 / p - 1.0 / q);

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    // probe battery: random fields, a localized bump, low eigenmodes
    std::vector<GridFunction> probes;
    for (int i = 0; i < 4; ++i) {
        GridFunction u(grid_, param_.n);
        for (double& v : u.raw()) v = unif(rng);
        probes.push_back(std::move(u));
    }
    {
        GridFunction bump(grid_, param_.n);
        int cx = grid_.cells[0] / 2, cy = grid_.cells[1] / 2;
        for (int k = 0; k < param_.n; ++k) bump.at(k, grid_.node(cx, cy)) = 1.0;
        probes.push_back(std::move(bump));
    }
    for (int mode = 1; mode <= 3; ++mode) {
        GridFunction u(grid_, param_.n);
        for (int iy = 0; iy < grid_.cells[1]; ++iy)
            for (int ix = 0; ix < grid_.cells[0]; ++ix) {
                constexpr double pi = 3.14159265358979323846;
                double v = std::sin(mode * pi * (grid_.coord(0, ix) - grid_.lo[0]) /
                                    (grid_.hi[0] - grid_.lo[0]));
                if (grid_.dim == 2)
                    v *= std::sin(mode * pi * (grid_.coord(1, iy) - grid_.lo[1]) /
                                  (grid_.hi[1] - grid_.lo[1]));
                for (int k = 0; k < param_.n; ++k) u.at(k, grid_.node(ix, iy)) = v;
            }
        probes.push_back(std::move(u));
    }

    // gaps: geometric ladder of step counts
    std::vector<long> gaps;
    for (long g = 1; g <= tg_.steps; g *= 2) gaps.push_back(g);
    if (gaps.back() != tg_.steps) gaps.push_back(tg_.steps);

    std::uniform_int_distribution<long> pick_start(0, tg_.steps - 1);
    struct Point { double gap, g; };
    std::vector<Point> pts;

    int per_gap = std::max(1, samples / static_cast<int>(gaps.size()));
    for (long gsteps : gaps) {
        double best = 0.0;
        for (int rep = 0; rep < per_gap; ++rep) {
            long j0 = time_dependent_ ? pick_start(rng) % std::max<long>(1, tg_.steps - gsteps) : 0;
            double s = tg_.time(j0);
            double t = tg_.time(j0 + gsteps);
            for (const auto& u : probes) {
                double denom = lp_norm(u, p);
                if (denom == 0.0) continue;
                double val = lp_norm(propagate(s, t, u), q) / denom;
                best = std::max(best, val);
            }
            // sharpen the p = q = 2 case with a few power iterations
            if (p == 2.0 && q == 2.0) {
                GridFunction w = probes[0];
                for (int it = 0; it < 5; ++it) {
                    w = adjoint_propagate(s, t, propagate(s, t, w));
                    double nn = lp_norm(w, 2.0);
                    if (nn == 0.0) break;
                    w.scale(1.0 / nn);
                }
                double denom = lp_norm(w, 2.0);
                if (denom > 0.0)
                    best = std::max(best, lp_norm(propagate(s, t, w), 2.0) / denom);
            }
            if (!time_dependent_) break;   // autonomous family: one start suffices
        }
        double gap = gsteps * tg_.dt();
        pts.push_back({gap, best * std::pow(gap, sigma)});
    }

    // Any gamma >= 0 yields a valid envelope with M(gamma) = max g e^{-gamma gap};
    // candidates are the pairwise log-slopes.  Among them pick the one
    // minimizing M(gamma) e^{gamma} (growth over one delay unit), so that
    // small-gap measurement noise cannot inflate gamma when a smaller
    // exponent with a modest M covers the same data.
    std::vector<double> candidates{0.0};
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            if (pts[j].gap <= pts[i].gap || pts[i].g <= 0.0 || pts[j].g <= 0.0) continue;
            double slope = (std::log(pts[j].g) - std::log(pts[i].g)) /
                           (pts[j].gap - pts[i].gap);
            if (slope > 0.0) candidates.push_back(slope);
        }
    auto envelope_M = [&](double gamma) {
        double M = 1.0;
        for (const auto& pt : pts)
            if (pt.g > 0.0) M = std::max(M, pt.g * std::exp(-gamma * pt.gap));
        return M;
    };
    double gamma = 0.0, best_cost = kInf;
    for (double cand : candidates) {
        double cost = envelope_M(cand) * std::exp(cand);
        if (cost < best_cost - 1e-15 ||
            (cost < best_cost + 1e-15 && cand < gamma)) {
            best_cost = cost;
            gamma = cand;
        }
    }
    return {envelope_M(gamma), gamma};
}

}  // namespace pdde
