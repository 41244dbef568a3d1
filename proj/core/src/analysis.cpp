#include "pdde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace pdde {

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return kInf;
    return p / (p - 1.0);
}

double gronwall_bound(double M, double gamma, double K, int n, double T) {
    if (M < 1.0) throw std::invalid_argument("gronwall_bound: M must be >= 1");
    if (gamma < 0.0) throw std::invalid_argument("gronwall_bound: gamma must be >= 0");
    if (K < 0.0) throw std::invalid_argument("gronwall_bound: K must be >= 0");
    double n2K = static_cast<double>(n) * n * K;
    double base = M * std::exp(gamma) * (1.0 + n2K) * std::exp(n2K * M * std::exp(gamma));
    return std::pow(base, std::ceil(T));
}

double smoothing_bound_mbar(double M, double gamma, double K, int n, int N,
                            double p, double q, double r) {
    if (M < 1.0) throw std::invalid_argument("smoothing_bound_mbar: M must be >= 1");
    if (gamma < 0.0) throw std::invalid_argument("smoothing_bound_mbar: gamma must be >= 0");
    double rp = conjugate_exponent(r);
    double sigma = 0.5 * N * (1.0 / p - 1.0 / q);
    // need (t - zeta)^{-sigma} in L_{r'}(0, 1): sigma r' < 1, degenerating
    // to sigma = 0 when r' = inf
    bool admissible = std::isinf(rp) ? sigma == 0.0 : sigma < 1.0 / rp;
    if (!admissible)
        throw std::invalid_argument(
            "smoothing_bound_mbar: N/2 (1/p - 1/q) < 1/r' fails; use the regularization schedule");
    double n2K = static_cast<double>(n) * n * K;
    double eg = std::exp(gamma);
    double mid = eg * (1.0 + n2K) * n2K * M / (1.0 - sigma) * std::exp(n2K * M * eg);
    double tail = std::isinf(rp) ? n2K    // r' = inf: the Hoelder factor degenerates to 1
                                 : n2K / std::pow(1.0 - sigma * rp, 1.0 / rp);
    return M * eg * (1.0 + mid + tail);
}

ScheduleReport regularization_schedule(int N, double p, double q, double r0) {
    if (!(r0 > 1.0)) throw std::invalid_argument("regularization_schedule: need r0 > 1");
    if (!(p >= 1.0) || !(p < q) || std::isinf(q))
        throw std::invalid_argument("regularization_schedule: need 1 <= p < q < inf");
    ScheduleReport rep;
    rep.N = N;
    rep.p = p;
    rep.q = q;
    rep.r0 = r0;
    rep.r_conj = conjugate_exponent(r0);
    rep.m0 = static_cast<int>(std::ceil(N * rep.r_conj - 1e-12));
    // limit value r0/(r0-1) -> 1 as r0 -> inf
    double frac = std::isinf(r0) ? 1.0 : r0 / (r0 - 1.0);
    rep.Theta = static_cast<int>(std::ceil(N * frac - 1e-12));

    // equal increments in 1/p_m
    rep.chain.resize(rep.m0 + 1);
    double inv_gap = (1.0 / p - 1.0 / q) / rep.m0;
    for (int m = 0; m <= rep.m0; ++m) rep.chain[m] = 1.0 / (1.0 / p - m * inv_gap);
    rep.chain.front() = p;
    rep.chain.back() = q;

    rep.valid = true;
    for (int m = 0; m < rep.m0; ++m) {
        double gap = 1.0 / rep.chain[m] - 1.0 / rep.chain[m + 1];
        if (0.5 * N * gap > 0.5 / rep.r_conj + 1e-12) rep.valid = false;
    }
    return rep;
}

EstimateReport verify_gronwall(const Trajectory& traj, const HistorySegment& h,
                               const BoundInputs& c) {
    EstimateReport rep;
    rep.bound_name = "gronwall";
    rep.inputs = c;
    double t0 = traj.time_grid.t0 + 1.0;   // solution part starts one delay in
    rep.measured = traj_sup_norm(traj, t0, traj.time_grid.T, c.p);
    rep.theoretical = gronwall_bound(c.M, c.gamma, c.K, c.n, c.T) *
                      initial_datum_norm(h, c.r, c.p);
    rep.margin = rep.theoretical - rep.measured;
    return rep;
}

EstimateReport verify_smoothing(const Trajectory& traj, const HistorySegment& h,
                                const BoundInputs& c) {
    EstimateReport rep;
    rep.bound_name = "smoothing";
    rep.inputs = c;
    double mbar = smoothing_bound_mbar(c.M, c.gamma, c.K, c.n, c.N, c.p, c.q, c.r);
    double datum = initial_datum_norm(h, c.r, c.p);
    double sigma = 0.5 * c.N * (1.0 / c.p - 1.0 / c.q);
    double t0 = traj.time_grid.t0 + 1.0;
    long j0 = traj.time_grid.index_of(t0);
    long j1 = traj.time_grid.index_of(traj.time_grid.T);
    // measured = sup_t ||u(t)||_q t^sigma, compared against Mbar ||u0||
    double measured = 0.0;
    for (long j = j0 + 1; j <= j1; ++j) {
        double t = traj.time_grid.time(j) - t0;
        measured = std::max(measured, lp_norm(traj.state(j), c.q) * std::pow(t, sigma));
    }
    rep.measured = measured;
    rep.theoretical = mbar * datum;
    rep.margin = rep.theoretical - rep.measured;
    return rep;
}

bool study_trend_pass(const std::vector<double>& errors, double slack,
                      double final_ratio) {
    if (errors.size() < 2) return false;
    for (size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > slack * errors[i - 1]) return false;
    if (errors.front() == 0.0) return true;   // amp = 0 study
    return errors.back() / errors.front() <= final_ratio;
}

ConvergenceStudy weakstar_study(const ParameterPoint& base, const SpatialGrid& grid,
                                const TimeGrid& tg, Scheme scheme,
                                const HistorySegment& h, const StudyOptions& opt) {
    ConvergenceStudy study;
    study.ms = opt.ms;
    study.q = opt.q;

    ScheduleReport sched = regularization_schedule(
        base.N, 1.0, 2.0, std::isinf(h.r) || h.r > 1.0 ? h.r : 2.0);
    study.window_lo = opt.window_lo > 0.0
                          ? opt.window_lo
                          : tg.t0 + sched.Theta + 1.0 + tg.dt();
    study.window_hi = tg.T;
    if (!(study.window_lo < study.window_hi))
        throw std::invalid_argument("weakstar_study: window requires T > Theta + 1");

    validate_parameter_point(base, grid, tg);
    EvolutionFamily base_fam(base, grid, tg, scheme);
    Trajectory u_base = solve_marching(base, base_fam, h, opt.quadrature);

    auto solve_one = [&](long m) {
        ParameterPoint pert = weakstar_oscillate(base, m, opt.amp, opt.time_mode);
        // the sequence members share a common sup bound K + |amp|
        if (pert.K_bound > 0.0) pert.K_bound = base.K_bound + std::abs(opt.amp);
        validate_parameter_point(pert, grid, tg);
        EvolutionFamily fam(pert, grid, tg, scheme);
        Trajectory u_m = solve_marching(pert, fam, h, opt.quadrature);
        long j0 = u_m.time_grid.index_of(study.window_lo);
        long j1 = u_m.time_grid.index_of(study.window_hi);
        double err = 0.0;
        for (long j = j0; j <= j1; ++j) {
            GridFunction d = u_m.state(j);
            d.axpy(-1.0, u_base.state(j));
            err = std::max(err, lp_norm(d, opt.q));
        }
        return err;
    };

    study.errors.resize(opt.ms.size());
    int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (size_t i = 0; i < opt.ms.size(); ++i) study.errors[i] = solve_one(opt.ms[i]);
    } else {
        for (size_t i = 0; i < opt.ms.size(); i += threads) {
            std::vector<std::future<double>> batch;
            for (size_t j = i; j < std::min(opt.ms.size(), i + threads); ++j)
                batch.push_back(std::async(std::launch::async, solve_one, opt.ms[j]));
            for (size_t j = 0; j < batch.size(); ++j) study.errors[i + j] = batch[j].get();
        }
    }
    study.pass = study_trend_pass(study.errors, opt.trend_slack, opt.final_ratio);
    return study;
}

std::vector<double> oracle_method_of_steps(double lambda, double c0, double c1,
                                           const std::function<double(double)>& history,
                                           double T, long steps_per_delay) {
    TimeGrid tg = TimeGrid::make(0.0, T, steps_per_delay);
    double dt = tg.dt();
    long S = steps_per_delay;
    std::vector<double> y(tg.steps + 1, 0.0);
    y[0] = history(0.0);

    auto delayed = [&](double t) {
        double tau = t - 1.0;
        if (tau <= 0.0) return history(tau);
        double idx = tau / dt;
        long j = static_cast<long>(std::floor(idx + 1e-9));
        double frac = idx - j;
        if (j >= tg.steps) return y[tg.steps];
        if (frac < 1e-9) return y[j];
        return (1.0 - frac) * y[j] + frac * y[j + 1];
    };
    (void)S;

    double mu = -lambda + c0;
    for (long m = 0; m < tg.steps; ++m) {
        double t = tg.time(m);
        double ym = y[m];
        auto f = [&](double tt, double yy) { return mu * yy + c1 * delayed(tt); };
        double k1 = f(t, ym);
        double k2 = f(t + 0.5 * dt, ym + 0.5 * dt * k1);
        double k3 = f(t + 0.5 * dt, ym + 0.5 * dt * k2);
        double k4 = f(t + dt, ym + dt * k3);
        y[m + 1] = ym + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

Trajectory oracle_monolithic(const ParameterPoint& a, const SpatialGrid& grid,
                             const TimeGrid& tg, const HistorySegment& h,
                             Scheme scheme) {
    long S = tg.steps_per_delay;
    double dt = tg.dt();
    double theta = scheme == Scheme::implicit_euler ? 1.0 : 0.5;
    int nodes = grid.num_nodes();

    bool time_dep = a.higher_order_time_dependent();

    struct CompOps {
        Eigen::SparseLU<SparseMat> lu;
        SparseMat E;
    };
    auto build = [&](int k, double t_cur, double t_next) {
        auto ops = std::make_unique<CompOps>();
        SparseMat I(nodes, nodes);
        I.setIdentity();
        SparseMat Lnext = assemble_form(a, k, t_next, grid);
        SparseMat Lcur = time_dep ? assemble_form(a, k, t_cur, grid) : Lnext;
        SparseMat A = I + (dt * theta) * Lnext;
        ops->E = I - (dt * (1.0 - theta)) * Lcur;
        ops->lu.compute(A);
        if (ops->lu.info() != Eigen::Success)
            throw std::runtime_error("oracle_monolithic: factorization failed");
        return ops;
    };

    std::vector<std::unique_ptr<CompOps>> cached(a.n);
    if (!time_dep)
        for (int k = 0; k < a.n; ++k) cached[k] = build(k, tg.t0, tg.t0 + dt);

    Trajectory traj;
    traj.provenance = Provenance::oracle;
    traj.time_grid = TimeGrid::make(tg.t0 - 1.0, tg.T, tg.steps_per_delay);
    traj.states.reserve(S + tg.steps + 1);
    for (long i = 0; i < S; ++i) traj.states.push_back(h.tail_at(i));
    traj.states.push_back(h.head);

    for (long m = 0; m < tg.steps; ++m) {
        long i = S + m;
        double t_cur = tg.time(m);
        const GridFunction& u_cur = traj.states[i];
        GridFunction g = apply_mult(a, 0, t_cur, u_cur);
        g.axpy(1.0, apply_mult(a, 1, t_cur, traj.states[i - S]));

        GridFunction u_next(grid, a.n);
        for (int k = 0; k < a.n; ++k) {
            std::unique_ptr<CompOps> local;
            CompOps* ops = cached[k].get();
            if (!ops) {
                local = build(k, t_cur, t_cur + dt);
                ops = local.get();
            }
            Eigen::Map<const Eigen::VectorXd> uk(u_cur.component(k), nodes);
            Eigen::Map<const Eigen::VectorXd> gk(g.component(k), nodes);
            Eigen::VectorXd rhs = ops->E * uk + dt * gk;
            Eigen::VectorXd x = ops->lu.solve(rhs);
            Eigen::Map<Eigen::VectorXd>(u_next.component(k), nodes) = x;
        }
        traj.states.push_back(std::move(u_next));
    }
    return traj;
}

double loglog_slope(const std::vector<double>& ts, const std::vector<double>& vals) {
    if (ts.size() != vals.size() || ts.size() < 2)
        throw std::invalid_argument("loglog_slope: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = ts.size();
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(ts[i]);
        double y = std::log(vals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace pdde
