#include "pddecli/config.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace pddecli {
namespace {

double read_exponent(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return pdde::kInf;
        throw ConfigError("exponent must be a number or \"inf\"");
    }
    return j.get<double>();
}

std::vector<pdde::CoeffExpr> parse_list(const json& j, size_t expected,
                                        const std::string& what) {
    if (!j.is_array() || j.size() != expected)
        throw ConfigError(what + ": expected " + std::to_string(expected) +
                          " expression strings");
    std::vector<pdde::CoeffExpr> out;
    out.reserve(expected);
    for (const auto& e : j) {
        try {
            out.push_back(pdde::parse_expr(e.get<std::string>()));
        } catch (const pdde::ParseError& pe) {
            throw ConfigError(what + ": " + pe.what());
        }
    }
    return out;
}

// flatten [[...row...], ...] or a flat list into expected entries
std::vector<pdde::CoeffExpr> parse_matrix(const json& j, size_t rows, size_t cols,
                                          const std::string& what) {
    if (j.is_array() && !j.empty() && j.front().is_array()) {
        if (j.size() != rows) throw ConfigError(what + ": expected " +
                                                std::to_string(rows) + " rows");
        std::vector<pdde::CoeffExpr> out;
        for (const auto& row : j) {
            auto r = parse_list(row, cols, what);
            out.insert(out.end(), r.begin(), r.end());
        }
        return out;
    }
    return parse_list(j, rows * cols, what);
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    cfg.source_path = path;
    cfg.config_hash = fnv1a_hex(text);

    try {
        const json& dom = j.at("domain");
        auto lo = dom.at("lo").get<std::vector<double>>();
        auto hi = dom.at("hi").get<std::vector<double>>();
        auto cells = dom.at("cells").get<std::vector<int>>();
        if (lo.size() != hi.size() || lo.size() != cells.size() ||
            lo.empty() || lo.size() > 2)
            throw ConfigError("domain: lo/hi/cells must have matching length 1 or 2");
        if (lo.size() == 1)
            cfg.grid = pdde::SpatialGrid::interval(lo[0], hi[0], cells[0]);
        else
            cfg.grid = pdde::SpatialGrid::rectangle(lo[0], hi[0], lo[1], hi[1],
                                                    cells[0], cells[1]);

        const json& tm = j.at("time");
        cfg.time = pdde::TimeGrid::make(tm.value("t0", 0.0), tm.at("T").get<double>(),
                                        tm.at("steps_per_delay").get<long>());

        const json& sys = j.at("system");
        int n = sys.at("n").get<int>();
        int N = cfg.grid.dim;
        cfg.system.n = n;
        cfg.system.N = N;
        cfg.system.bc.clear();
        for (const auto& b : sys.at("bc"))
            cfg.system.bc.push_back(pdde::bc_from_string(b.get<std::string>()));
        cfg.system.a_second = parse_matrix(sys.at("a_second"), n, N * N, "a_second");
        if (sys.contains("a_first"))
            cfg.system.a_first = parse_matrix(sys.at("a_first"), n, N, "a_first");
        else
            cfg.system.a_first.assign(n * N, pdde::CoeffExpr::constant(0.0));
        if (sys.contains("b_first"))
            cfg.system.b_first = parse_matrix(sys.at("b_first"), n, N, "b_first");
        else
            cfg.system.b_first.assign(n * N, pdde::CoeffExpr::constant(0.0));
        cfg.system.c0 = sys.contains("c0")
                            ? parse_matrix(sys.at("c0"), n, n, "c0")
                            : std::vector<pdde::CoeffExpr>(n * n, pdde::CoeffExpr::constant(0.0));
        cfg.system.c1 = sys.contains("c1")
                            ? parse_matrix(sys.at("c1"), n, n, "c1")
                            : std::vector<pdde::CoeffExpr>(n * n, pdde::CoeffExpr::constant(0.0));
        cfg.system.d0 = sys.contains("d0")
                            ? parse_list(sys.at("d0"), n, "d0")
                            : std::vector<pdde::CoeffExpr>(n, pdde::CoeffExpr::constant(0.0));
        cfg.system.alpha0 = sys.at("alpha0").get<double>();
        cfg.system.K_bound = sys.value("K", 0.0);

        const json& ini = j.at("initial");
        cfg.head = parse_list(ini.at("head"), n, "initial.head");
        cfg.tail = ini.contains("tail") ? parse_list(ini.at("tail"), n, "initial.tail")
                                        : cfg.head;
        cfg.history_r = ini.contains("r") ? read_exponent(ini.at("r")) : pdde::kInf;
        if (!(cfg.history_r >= 1.0))
            throw ConfigError("initial.r must be an exponent in [1, inf]");

        if (j.contains("solver")) {
            const json& sol = j.at("solver");
            std::string sch = sol.value("scheme", "crank_nicolson");
            if (sch == "crank_nicolson") cfg.scheme = pdde::Scheme::crank_nicolson;
            else if (sch == "implicit_euler") cfg.scheme = pdde::Scheme::implicit_euler;
            else throw ConfigError("solver.scheme: unknown scheme '" + sch + "'");
            std::string qd = sol.value("quadrature", "trapezoid");
            if (qd == "trapezoid") cfg.quadrature = pdde::Quadrature::trapezoid;
            else if (qd == "left_rectangle") cfg.quadrature = pdde::Quadrature::left_rectangle;
            else throw ConfigError("solver.quadrature: unknown rule '" + qd + "'");
            cfg.method = sol.value("method", "marching");
            if (cfg.method != "marching" && cfg.method != "picard")
                throw ConfigError("solver.method must be 'marching' or 'picard'");
            if (sol.contains("picard")) {
                const json& pc = sol.at("picard");
                cfg.picard.mu = pc.value("mu", 0.0);
                cfg.picard.tol = pc.value("tol", 1e-10);
                cfg.picard.max_iters = pc.value("max_iters", 200);
                cfg.picard.p = pc.value("p", 2.0);
                cfg.picard.adaptive = pc.value("adaptive", true);
            }
            cfg.picard.quadrature = cfg.quadrature;
        }

        if (j.contains("output")) {
            const json& out = j.at("output");
            if (out.contains("qs")) {
                cfg.norm_qs.clear();
                for (const auto& q : out.at("qs")) cfg.norm_qs.push_back(read_exponent(q));
            }
            cfg.snapshots = out.value("snapshots", false);
        }

        if (j.contains("study")) {
            const json& st = j.at("study");
            pdde::StudyOptions opt;
            if (st.contains("ms")) opt.ms = st.at("ms").get<std::vector<long>>();
            opt.amp = st.value("amp", 0.1);
            std::string mode = st.value("mode", "time");
            if (mode == "time") opt.time_mode = true;
            else if (mode == "space") opt.time_mode = false;
            else throw ConfigError("study.mode must be 'time' or 'space'");
            if (st.contains("q")) opt.q = read_exponent(st.at("q"));
            opt.window_lo = st.value("window_lo", 0.0);
            opt.trend_slack = st.value("trend_slack", 1.5);
            opt.final_ratio = st.value("final_ratio", 0.2);
            cfg.study = opt;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    try {
        pdde::validate_parameter_point(cfg.system, cfg.grid, cfg.time);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

pdde::HistorySegment build_history(const RunConfig& cfg) {
    pdde::HistorySegment h;
    h.r = cfg.history_r;
    int n = cfg.system.n;
    h.head = pdde::GridFunction(cfg.grid, n);
    auto fill = [&](pdde::GridFunction& u, const std::vector<pdde::CoeffExpr>& exprs,
                    double tau) {
        for (int k = 0; k < n; ++k)
            for (int iy = 0; iy < cfg.grid.cells[1]; ++iy)
                for (int ix = 0; ix < cfg.grid.cells[0]; ++ix)
                    u.at(k, cfg.grid.node(ix, iy)) =
                        exprs[k].eval(tau, cfg.grid.coord(0, ix),
                                      cfg.grid.dim == 2 ? cfg.grid.coord(1, iy) : 0.0);
    };
    fill(h.head, cfg.head, 0.0);
    long S = cfg.time.steps_per_delay;
    h.tail.resize(S, pdde::GridFunction(cfg.grid, n));
    for (long i = 0; i < S; ++i)
        fill(h.tail[i], cfg.tail, -1.0 + (i + 1) * cfg.time.dt());
    return h;
}

int detect_threads() {
    const char* env = std::getenv("PDDE_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v > 0 ? v : 1;
}

}  // namespace pddecli
