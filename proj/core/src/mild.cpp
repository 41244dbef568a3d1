#include "pdde/mild.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdde {

namespace {

void check_history(const EvolutionFamily& fam, const HistorySegment& h) {
    long S = fam.time_grid().steps_per_delay;
    if (static_cast<long>(h.tail.size()) != S)
        throw std::invalid_argument("history tail length must equal steps_per_delay");
    if (h.head.components() != fam.parameter().n)
        throw std::invalid_argument("history component count mismatch");
}

GridFunction zero_like(const EvolutionFamily& fam) {
    return GridFunction(fam.grid(), fam.parameter().n);
}

}  // namespace

GridFunction duhamel_integral(const EvolutionFamily& fam, double t,
                              const std::vector<GridFunction>& f, Quadrature quad) {
    const TimeGrid& tg = fam.time_grid();
    long jt = tg.index_of(t);
    if (static_cast<long>(f.size()) < jt + 1)
        throw std::invalid_argument("duhamel_integral: integrand not sampled up to t");
    double dt = tg.dt();
    GridFunction acc = zero_like(fam);
    // I(t_{j+1}) = U(t_{j+1}, t_j) (I(t_j) + quadrature increment)
    for (long j = 0; j < jt; ++j) {
        if (quad == Quadrature::left_rectangle) {
            acc.axpy(dt, f[j]);
            acc = fam.step(j, acc);
        } else {
            acc.axpy(0.5 * dt, f[j]);
            acc = fam.step(j, acc);
            acc.axpy(0.5 * dt, f[j + 1]);
        }
    }
    return acc;
}

Trajectory gothic_g_apply(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h, const Trajectory& v,
                          Quadrature quad) {
    check_history(fam, h);
    const TimeGrid& tg = fam.time_grid();
    if (v.time_grid.steps != tg.steps || v.time_grid.t0 != tg.t0)
        throw std::invalid_argument("gothic_g_apply: iterate not on the family time grid");
    if (lp_norm(v.state(0), kInf) != 0.0)
        throw std::invalid_argument("gothic_g_apply: iterate must vanish at the initial time");

    long S = tg.steps_per_delay;
    double dt = tg.dt();

    // free term w(t) = U(t, t0) u0^(1)
    std::vector<GridFunction> w(tg.steps + 1, h.head);
    for (long m = 0; m < tg.steps; ++m) w[m + 1] = fam.step(m, w[m]);

    // integrand g(t_m) = C0(v + w) + C1 * delayed
    auto integrand = [&](long m) {
        double t = tg.time(m);
        GridFunction u = v.state(m);
        u.axpy(1.0, w[m]);
        GridFunction g = apply_mult(a, 0, t, u);
        GridFunction delayed = m < S ? h.tail_at(m) : [&] {
            GridFunction d = v.state(m - S);
            d.axpy(1.0, w[m - S]);
            return d;
        }();
        g.axpy(1.0, apply_mult(a, 1, t, delayed));
        return g;
    };

    Trajectory out;
    out.time_grid = tg;
    out.provenance = v.provenance;
    out.states.reserve(tg.steps + 1);
    out.states.push_back(zero_like(fam));
    GridFunction g_cur = integrand(0);
    for (long m = 0; m < tg.steps; ++m) {
        GridFunction acc = out.states.back();
        if (quad == Quadrature::left_rectangle) {
            acc.axpy(dt, g_cur);
            acc = fam.step(m, acc);
            g_cur = integrand(m + 1);
        } else {
            acc.axpy(0.5 * dt, g_cur);
            acc = fam.step(m, acc);
            g_cur = integrand(m + 1);
            acc.axpy(0.5 * dt, g_cur);
        }
        out.states.push_back(std::move(acc));
    }
    return out;
}

double weighted_metric(const Trajectory& u, const Trajectory& v, double mu, double p) {
    if (u.time_grid.steps != v.time_grid.steps || u.time_grid.t0 != v.time_grid.t0)
        throw std::invalid_argument("weighted_metric: time grid mismatch");
    double dt = u.time_grid.dt();
    double best = 0.0;
    for (long m = 0; m <= u.time_grid.steps; ++m) {
        GridFunction d = u.state(m);
        d.axpy(-1.0, v.state(m));
        best = std::max(best, std::exp(-mu * m * dt) * lp_norm(d, p));
    }
    return best;
}

PicardResult solve_picard(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h, const PicardConfig& cfg) {
    check_history(fam, h);
    const TimeGrid& tg = fam.time_grid();
    long S = tg.steps_per_delay;
    long steps = tg.steps;
    double dt = tg.dt();

    PicardResult res;
    res.K_used = sup_bound_K({a}, fam.grid(), tg);
    if (cfg.mu > 0.0) {
        res.mu_used = cfg.mu;
        res.M_used = 1.0;
        res.gamma_used = 0.0;
    } else {
        MGammaFit fit = fam.estimate_M_gamma(2.0, 2.0, 16);
        res.M_used = fit.M;
        res.gamma_used = fit.gamma;
        double span = tg.T - tg.t0;
        res.mu_used = 4.0 * a.n * a.n * res.K_used * fit.M * std::exp(fit.gamma * span);
        if (res.mu_used <= 0.0) res.mu_used = 1.0;
    }

    // free term
    std::vector<GridFunction> w(steps + 1, h.head);
    for (long m = 0; m < steps; ++m) w[m + 1] = fam.step(m, w[m]);

    auto sweep = [&](const std::vector<GridFunction>& v) {
        auto integrand = [&](long m) {
            double t = tg.time(m);
            GridFunction u = v[m];
            u.axpy(1.0, w[m]);
            GridFunction g = apply_mult(a, 0, t, u);
            GridFunction delayed = m < S ? h.tail_at(m) : [&] {
                GridFunction d = v[m - S];
                d.axpy(1.0, w[m - S]);
                return d;
            }();
            g.axpy(1.0, apply_mult(a, 1, t, delayed));
            return g;
        };
        std::vector<GridFunction> z;
        z.reserve(steps + 1);
        z.push_back(zero_like(fam));
        GridFunction g_cur = integrand(0);
        for (long m = 0; m < steps; ++m) {
            GridFunction acc = z.back();
            if (cfg.quadrature == Quadrature::left_rectangle) {
                acc.axpy(dt, g_cur);
                acc = fam.step(m, acc);
                g_cur = integrand(m + 1);
            } else {
                acc.axpy(0.5 * dt, g_cur);
                acc = fam.step(m, acc);
                g_cur = integrand(m + 1);
                acc.axpy(0.5 * dt, g_cur);
            }
            z.push_back(std::move(acc));
        }
        return z;
    };

    auto metric = [&](const std::vector<GridFunction>& x,
                      const std::vector<GridFunction>& y, double mu) {
        double best = 0.0;
        for (long m = 0; m <= steps; ++m) {
            GridFunction d = x[m];
            d.axpy(-1.0, y[m]);
            best = std::max(best, std::exp(-mu * m * dt) * lp_norm(d, cfg.p));
        }
        return best;
    };

    int restarts_left = cfg.adaptive ? 4 : 0;
    for (;;) {
        std::vector<GridFunction> v(steps + 1, zero_like(fam));
        res.ratios.clear();
        res.iterations = 0;
        double prev_d = -1.0;
        int bad_ratios = 0;
        bool converged = false;
        while (res.iterations < cfg.max_iters) {
            std::vector<GridFunction> z = sweep(v);
            double d = metric(z, v, res.mu_used);
            ++res.iterations;
            if (prev_d > 0.0) {
                double ratio = d / prev_d;
                res.ratios.push_back(ratio);
                if (ratio >= 1.0) ++bad_ratios;
            }
            // the weighted metric certifies contraction; the unweighted
            // increment guards against e^{-mu t} hiding late-time error
            double d_flat = metric(z, v, 0.0);
            v = std::move(z);
            prev_d = d;
            if (d < cfg.tol && d_flat < cfg.tol) {
                converged = true;
                break;
            }
            if (bad_ratios >= 2) break;
        }
        if (converged) {
            Trajectory traj;
            traj.provenance = Provenance::picard;
            traj.time_grid = TimeGrid::make(tg.t0 - 1.0, tg.T, tg.steps_per_delay);
            traj.states.reserve(S + steps + 1);
            for (long i = 0; i < S; ++i) traj.states.push_back(h.tail_at(i));
            for (long m = 0; m <= steps; ++m) {
                GridFunction u = v[m];
                u.axpy(1.0, w[m]);
                traj.states.push_back(std::move(u));
            }
            res.trajectory = std::move(traj);
            return res;
        }
        if (bad_ratios >= 2 && restarts_left-- > 0) {
            res.mu_used *= 2.0;
            continue;
        }
        throw std::runtime_error(bad_ratios >= 2
                                     ? "solve_picard: contraction failure"
                                     : "solve_picard: max_iters exceeded");
    }
}

Trajectory solve_marching_from(const ParameterPoint& a, const EvolutionFamily& fam,
                               const HistorySegment& h, double start_time,
                               Quadrature quad) {
    check_history(fam, h);
    const TimeGrid& tg = fam.time_grid();
    long j0 = tg.index_of(start_time);
    long S = tg.steps_per_delay;
    long steps = tg.steps - j0;
    if (steps < 0) throw std::invalid_argument("solve_marching: start time past T");
    double dt = tg.dt();

    Trajectory traj;
    traj.provenance = Provenance::marching;
    traj.time_grid = TimeGrid::make(start_time - 1.0, tg.T, tg.steps_per_delay);
    traj.states.reserve(S + steps + 1);
    for (long i = 0; i < S; ++i) traj.states.push_back(h.tail_at(i));
    traj.states.push_back(h.head);

    auto coupling = [&](double t, const GridFunction& u, const GridFunction& delayed) {
        GridFunction g = apply_mult(a, 0, t, u);
        g.axpy(1.0, apply_mult(a, 1, t, delayed));
        return g;
    };

    for (long m = 0; m < steps; ++m) {
        long i = S + m;                 // current trajectory node
        double t_cur = tg.time(j0 + m);
        double t_next = tg.time(j0 + m + 1);
        const GridFunction& u_cur = traj.states[i];
        GridFunction g_cur = coupling(t_cur, u_cur, traj.states[i - S]);

        GridFunction u_next(fam.grid(), a.n);
        if (quad == Quadrature::left_rectangle) {
            GridFunction tmp = u_cur;
            tmp.axpy(dt, g_cur);
            u_next = fam.step(j0 + m, tmp);
        } else {
            GridFunction base = u_cur;
            base.axpy(0.5 * dt, g_cur);
            base = fam.step(j0 + m, base);
            const GridFunction& delayed_next = traj.states[i + 1 - S];
            // resolve the trapezoid's implicitness in u(t_{m+1}) by
            // fixed-point iteration down to round-off
            GridFunction x = base;
            x.axpy(0.5 * dt, coupling(t_next, base, delayed_next));
            for (int it = 0; it < 16; ++it) {
                GridFunction nx = base;
                nx.axpy(0.5 * dt, coupling(t_next, x, delayed_next));
                GridFunction diff = nx;
                diff.axpy(-1.0, x);
                double delta = lp_norm(diff, kInf);
                x = std::move(nx);
                if (delta <= 1e-14 * std::max(1.0, lp_norm(x, kInf))) break;
            }
            u_next = std::move(x);
        }
        traj.states.push_back(std::move(u_next));
    }
    return traj;
}

Trajectory solve_marching(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h, Quadrature quad) {
    return solve_marching_from(a, fam, h, fam.time_grid().t0, quad);
}

double translation_check(const Trajectory& u, const ParameterPoint& a,
                         const EvolutionFamily& fam, double theta, double p,
                         Quadrature quad) {
    const TimeGrid& tg = fam.time_grid();
    if (!tg.on_grid(theta) || !(theta < tg.T))
        throw std::invalid_argument("translation_check: theta must be a grid time < T");
    long S = tg.steps_per_delay;

    long i_theta = u.time_grid.index_of(theta);
    HistorySegment h;
    h.head = u.state(i_theta);
    h.r = 2.0;
    h.tail.reserve(S);
    for (long i = 0; i < S; ++i) h.tail.push_back(u.state(i_theta - S + 1 + i));
    h.at_minus_one.push_back(u.state(i_theta - S));

    Trajectory shifted = solve_marching_from(a, fam, h, theta, quad);
    double best = 0.0;
    long jt = tg.index_of(tg.T);
    long j_theta = tg.index_of(theta);
    for (long j = j_theta; j <= jt; ++j) {
        double t = tg.time(j);
        GridFunction d = u.at_time(t);
        d.axpy(-1.0, shifted.at_time(t));
        best = std::max(best, lp_norm(d, p));
    }
    return best;
}

double integral_residual(const Trajectory& u, const ParameterPoint& a,
                         const EvolutionFamily& fam, const HistorySegment& h,
                         double t, double p, Quadrature quad) {
    const TimeGrid& tg = fam.time_grid();
    long jt = tg.index_of(t);
    long S = tg.steps_per_delay;
    long base = u.time_grid.index_of(tg.t0);

    std::vector<GridFunction> f;
    f.reserve(jt + 1);
    for (long m = 0; m <= jt; ++m) {
        double tm = tg.time(m);
        GridFunction g = apply_mult(a, 0, tm, u.state(base + m));
        const GridFunction& delayed = m < S ? h.tail_at(m) : u.state(base + m - S);
        g.axpy(1.0, apply_mult(a, 1, tm, delayed));
        f.push_back(std::move(g));
    }
    GridFunction rhs = fam.propagate(tg.t0, t, h.head);
    rhs.axpy(1.0, duhamel_integral(fam, t, f, quad));
    rhs.axpy(-1.0, u.state(base + jt));
    return lp_norm(rhs, p);
}

}  // namespace pdde
