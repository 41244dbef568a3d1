#include "pddecli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "pddecli/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pddecli {
namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt_exponent(double q) {
    if (std::isinf(q)) return "inf";
    std::ostringstream os;
    os << q;
    return os.str();
}

struct CheckRow {
    std::string check;
    double theoretical;
    double measured;
    bool pass() const { return measured <= theoretical; }
};

void write_report(std::ostream& os, const std::vector<CheckRow>& rows) {
    os << "check,theoretical,measured,margin,pass\n";
    for (const auto& r : rows)
        os << r.check << ',' << fmt(r.theoretical) << ',' << fmt(r.measured) << ','
           << fmt(r.theoretical - r.measured) << ',' << (r.pass() ? "true" : "false")
           << '\n';
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const json& extra,
                    double wall_seconds) {
    json m;
    m["config_hash"] = cfg.config_hash;
    m["config_path"] = cfg.source_path;
    m["tool_version"] = kToolVersion;
    m["wall_seconds"] = wall_seconds;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

pdde::GridFunction random_state(const pdde::SpatialGrid& g, int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    pdde::GridFunction u(g, n);
    for (double& v : u.raw()) v = dist(rng);
    return u;
}

pdde::Trajectory run_solver(const RunConfig& cfg, const pdde::EvolutionFamily& fam,
                            const pdde::HistorySegment& h) {
    if (cfg.method == "picard")
        return pdde::solve_picard(cfg.system, fam, h, cfg.picard).trajectory;
    return pdde::solve_marching(cfg.system, fam, h, cfg.quadrature);
}

}  // namespace

int cmd_solve(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    auto start = std::chrono::steady_clock::now();
    json extra;
    try {
        fs::create_directories(out_dir);
        pdde::HistorySegment h = build_history(cfg);
        pdde::EvolutionFamily fam(cfg.system, cfg.grid, cfg.time, cfg.scheme);

        pdde::Trajectory traj;
        if (cfg.method == "picard") {
            pdde::PicardResult pr = pdde::solve_picard(cfg.system, fam, h, cfg.picard);
            traj = std::move(pr.trajectory);
            extra["picard"] = {{"iterations", pr.iterations},
                               {"mu", pr.mu_used},
                               {"K", pr.K_used},
                               {"M", pr.M_used},
                               {"gamma", pr.gamma_used}};
        } else {
            traj = pdde::solve_marching(cfg.system, fam, h, cfg.quadrature);
        }

        std::ofstream norms(fs::path(out_dir) / "norms.csv", std::ios::binary);
        norms << "t";
        for (double q : cfg.norm_qs) norms << ",norm_" << fmt_exponent(q);
        norms << '\n';
        long j0 = traj.time_grid.index_of(cfg.time.t0);
        for (long j = j0; j < static_cast<long>(traj.states.size()); ++j) {
            norms << fmt(cfg.time.time(j - j0));
            for (double q : cfg.norm_qs)
                norms << ',' << fmt(pdde::lp_norm(traj.state(j), q));
            norms << '\n';
        }

        if (cfg.snapshots) {
            std::ofstream snap(fs::path(out_dir) / "final_state.csv", std::ios::binary);
            snap << "component,node,x1,x2,value\n";
            const pdde::GridFunction& u = traj.states.back();
            for (int k = 0; k < cfg.system.n; ++k)
                for (int iy = 0; iy < cfg.grid.cells[1]; ++iy)
                    for (int ix = 0; ix < cfg.grid.cells[0]; ++ix) {
                        int node = cfg.grid.node(ix, iy);
                        snap << k << ',' << node << ',' << fmt(cfg.grid.coord(0, ix))
                             << ',' << fmt(cfg.grid.dim == 2 ? cfg.grid.coord(1, iy) : 0.0)
                             << ',' << fmt(u.at(k, node)) << '\n';
                    }
        }
        extra["method"] = cfg.method;
        extra["solved"] = true;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, cfg, extra, wall);
    return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::vector<CheckRow> rows;
    try {
        pdde::HistorySegment h = build_history(cfg);
        pdde::EvolutionFamily fam(cfg.system, cfg.grid, cfg.time, cfg.scheme);
        std::mt19937 rng(20240817);
        const double t0 = cfg.time.t0, T = cfg.time.T;
        long steps = cfg.time.steps;

        if (suite == "cocycle") {
            std::uniform_int_distribution<long> node(0, steps);
            double worst = 0.0;
            for (int trial = 0; trial < 20; ++trial) {
                long a = node(rng), b = node(rng), c = node(rng);
                if (a > b) std::swap(a, b);
                if (b > c) std::swap(b, c);
                if (a > b) std::swap(a, b);
                pdde::GridFunction u = random_state(cfg.grid, cfg.system.n, rng);
                double res = fam.cocycle_check(cfg.time.time(a), cfg.time.time(b),
                                               cfg.time.time(c), u);
                worst = std::max(worst, res / pdde::lp_norm(u, 2.0));
            }
            rows.push_back({"cocycle_residual", 1e-12, worst});
        } else if (suite == "duality") {
            std::uniform_int_distribution<long> node(0, steps);
            double worst = 0.0, worst_re = 0.0;
            for (int trial = 0; trial < 50; ++trial) {
                long a = node(rng), b = node(rng);
                if (a > b) std::swap(a, b);
                if (a == b) b = std::min(steps, b + 1);
                double s = cfg.time.time(a), t = cfg.time.time(b);
                pdde::GridFunction u = random_state(cfg.grid, cfg.system.n, rng);
                pdde::GridFunction v = random_state(cfg.grid, cfg.system.n, rng);
                pdde::GridFunction Uu = fam.propagate(s, t, u);
                pdde::GridFunction Av = fam.adjoint_propagate(s, t, v);
                double lhs = pdde::duality_pairing(Uu, v);
                double rhs = pdde::duality_pairing(u, Av);
                double scale = pdde::lp_norm(u, 2.0) * pdde::lp_norm(v, 2.0);
                worst = std::max(worst, std::abs(lhs - rhs) / scale);
                if (trial < 10) {
                    pdde::GridFunction Rv =
                        fam.adjoint_propagate(s, t, v, pdde::AdjointMode::rediscretize);
                    Rv.axpy(-1.0, Av);
                    worst_re = std::max(worst_re,
                                        pdde::lp_norm(Rv, 2.0) / pdde::lp_norm(v, 2.0));
                }
            }
            rows.push_back({"duality_transpose", 1e-10, worst});
            rows.push_back({"duality_rediscretize", 1e-3, worst_re});
        } else if (suite == "picard") {
            pdde::PicardConfig pc = cfg.picard;
            pdde::PicardResult pr = pdde::solve_picard(cfg.system, fam, h, pc);
            double max_ratio = 0.0;
            for (double r : pr.ratios) max_ratio = std::max(max_ratio, r);
            rows.push_back({"picard_ratio", 0.55, max_ratio});
            double bound = std::ceil(std::log(pc.tol) / std::log(0.55)) + 2;
            rows.push_back({"picard_iterations", bound,
                            static_cast<double>(pr.iterations)});
        } else if (suite == "oracles") {
            pdde::Trajectory um = pdde::solve_marching(cfg.system, fam, h, cfg.quadrature);
            pdde::PicardResult pr = pdde::solve_picard(cfg.system, fam, h, cfg.picard);
            double gap_pm = 0.0;
            for (size_t j = 0; j < um.states.size(); ++j) {
                pdde::GridFunction d = um.states[j];
                d.axpy(-1.0, pr.trajectory.states[j]);
                gap_pm = std::max(gap_pm, pdde::lp_norm(d, 2.0));
            }
            rows.push_back({"picard_vs_marching", 1e-8, gap_pm});
            pdde::Trajectory mono =
                pdde::oracle_monolithic(cfg.system, cfg.grid, cfg.time, h, cfg.scheme);
            double gap_mono = 0.0;
            for (size_t j = 0; j < um.states.size(); ++j) {
                pdde::GridFunction d = um.states[j];
                d.axpy(-1.0, mono.states[j]);
                gap_mono = std::max(gap_mono, pdde::lp_norm(d, 2.0));
            }
            rows.push_back({"marching_vs_monolithic", 1e-2, gap_mono});
        } else if (suite == "gronwall" || suite == "smoothing") {
            pdde::MGammaFit f = fam.estimate_M_gamma(2.0, 2.0, 12);
            pdde::BoundInputs c;
            c.M = f.M;
            c.gamma = f.gamma;
            c.K = pdde::sup_bound_K({cfg.system}, cfg.grid, cfg.time);
            c.n = cfg.system.n;
            c.N = cfg.grid.dim;
            c.p = 2.0;
            c.q = pdde::kInf;
            c.r = cfg.history_r;
            c.T = T - t0;
            pdde::Trajectory um = pdde::solve_marching(cfg.system, fam, h, cfg.quadrature);
            pdde::EstimateReport rep = suite == "gronwall"
                                           ? pdde::verify_gronwall(um, h, c)
                                           : pdde::verify_smoothing(um, h, c);
            rows.push_back({rep.bound_name, rep.theoretical, rep.measured});
        } else {
            std::cerr << "config error: unknown suite '" << suite << "'\n";
            return kExitConfig;
        }
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }

    std::ofstream out("report.csv", std::ios::binary);
    write_report(out, rows);
    write_report(std::cout, rows);
    for (const auto& r : rows)
        if (!r.pass()) return kExitCheck;
    return kExitOk;
}

int cmd_schedule(int N, double p, double q, const std::string& r0_str) {
    double r0;
    if (r0_str == "inf") {
        r0 = pdde::kInf;
    } else {
        char* end = nullptr;
        r0 = std::strtod(r0_str.c_str(), &end);
        if (end == r0_str.c_str() || *end != '\0') {
            std::cerr << "config error: --r0 must be a real or 'inf'\n";
            return kExitConfig;
        }
    }
    pdde::ScheduleReport rep;
    try {
        rep = pdde::regularization_schedule(N, p, q, r0);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    std::cout << "N=" << rep.N << " p=" << fmt_exponent(rep.p) << " q="
              << fmt_exponent(rep.q) << " r0=" << fmt_exponent(rep.r0) << '\n';
    std::cout << "m0=" << rep.m0 << '\n';
    std::cout << "Theta=" << rep.Theta << '\n';
    std::cout << "chain=";
    for (size_t i = 0; i < rep.chain.size(); ++i)
        std::cout << (i ? "," : "") << fmt_exponent(rep.chain[i]);
    std::cout << '\n';
    std::cout << "valid=" << (rep.valid ? "true" : "false") << '\n';
    return kExitOk;
}

int cmd_study(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (!cfg.study)
            throw ConfigError("study: config has no study section");
        if (cfg.study->window_lo == 0.0 && cfg.time.T - cfg.time.t0 <= 2.0)
            throw ConfigError("study: windowed mode needs T - t0 > 2");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    auto start = std::chrono::steady_clock::now();
    pdde::ConvergenceStudy study;
    try {
        fs::create_directories(out_dir);
        pdde::HistorySegment h = build_history(cfg);
        pdde::StudyOptions opt = *cfg.study;
        opt.quadrature = cfg.quadrature;
        opt.threads = detect_threads();
        study = pdde::weakstar_study(cfg.system, cfg.grid, cfg.time, cfg.scheme, h, opt);
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }

    std::ofstream out(fs::path(out_dir) / "study.csv", std::ios::binary);
    out << "m,err\n";
    for (size_t i = 0; i < study.ms.size(); ++i)
        out << study.ms[i] << ',' << fmt(study.errors[i]) << '\n';

    json extra;
    extra["study"] = {{"pass", study.pass},
                      {"window_lo", study.window_lo},
                      {"window_hi", study.window_hi},
                      {"q", study.q}};
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_dir, cfg, extra, wall);

    std::cout << "study verdict: " << (study.pass ? "pass" : "fail") << '\n';
    return study.pass ? kExitOk : kExitCheck;
}

}  // namespace pddecli
