#include "pdde/grid.hpp"

#include <algorithm>
#include <cmath>

namespace pdde {

SpatialGrid SpatialGrid::interval(double a, double b, int nx) {
    if (!(b > a)) throw std::invalid_argument("interval: need hi > lo");
    if (nx < 2) throw std::invalid_argument("interval: need at least 2 cells");
    SpatialGrid g;
    g.dim = 1;
    g.lo = {a, 0.0};
    g.hi = {b, 1.0};
    g.cells = {nx, 1};
    return g;
}

SpatialGrid SpatialGrid::rectangle(double ax, double bx, double ay, double by,
                                   int nx, int ny) {
    if (!(bx > ax) || !(by > ay)) throw std::invalid_argument("rectangle: need hi > lo");
    if (nx < 2 || ny < 2) throw std::invalid_argument("rectangle: need at least 2 cells per axis");
    SpatialGrid g;
    g.dim = 2;
    g.lo = {ax, ay};
    g.hi = {bx, by};
    g.cells = {nx, ny};
    return g;
}

TimeGrid TimeGrid::make(double t0, double T, long steps_per_delay) {
    if (!(T > t0)) throw std::invalid_argument("TimeGrid: need T > t0");
    if (steps_per_delay < 1) throw std::invalid_argument("TimeGrid: steps_per_delay >= 1");
    TimeGrid tg;
    tg.t0 = t0;
    tg.T = T;
    tg.steps_per_delay = steps_per_delay;
    double raw = (T - t0) * static_cast<double>(steps_per_delay);
    tg.steps = std::lround(raw);
    if (std::abs(raw - static_cast<double>(tg.steps)) > 1e-9 || tg.steps < 1)
        throw std::invalid_argument("TimeGrid: T - t0 must be a multiple of dt");
    return tg;
}

long TimeGrid::index_of(double t) const {
    double raw = (t - t0) * static_cast<double>(steps_per_delay);
    long j = std::lround(raw);
    if (std::abs(raw - static_cast<double>(j)) > 1e-9 || j < 0 || j > steps)
        throw std::invalid_argument("time " + std::to_string(t) + " is off-grid");
    return j;
}

bool TimeGrid::on_grid(double t) const {
    double raw = (t - t0) * static_cast<double>(steps_per_delay);
    long j = std::lround(raw);
    return std::abs(raw - static_cast<double>(j)) <= 1e-9 && j >= 0 && j <= steps;
}

GridFunction& GridFunction::axpy(double alpha, const GridFunction& other) {
    if (!compatible_with(other)) throw std::invalid_argument("axpy: grid mismatch");
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += alpha * other.values_[i];
    return *this;
}

GridFunction& GridFunction::scale(double alpha) {
    for (double& v : values_) v *= alpha;
    return *this;
}

double lp_norm(const GridFunction& u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : u.raw()) m = std::max(m, std::abs(v));
        return m;
    }
    double vol = u.grid().cell_volume();
    double acc = 0.0;
    // fixed summation order for reproducibility
    for (double v : u.raw()) acc += std::pow(std::abs(v), p);
    return std::pow(acc * vol, 1.0 / p);
}

double duality_pairing(const GridFunction& u, const GridFunction& v) {
    if (!u.compatible_with(v)) throw std::invalid_argument("duality_pairing: grid mismatch");
    double acc = 0.0;
    const auto& a = u.raw();
    const auto& b = v.raw();
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc * u.grid().cell_volume();
}

double history_tail_norm(const HistorySegment& h, double r, double p) {
    if (h.tail.empty()) throw std::invalid_argument("history_tail_norm: empty history");
    if (!(r >= 1.0)) throw std::invalid_argument("history_tail_norm: r must be >= 1");
    double dt = 1.0 / static_cast<double>(h.tail.size());
    if (std::isinf(r)) {
        double m = 0.0;
        for (const auto& s : h.tail) m = std::max(m, lp_norm(s, p));
        return m;
    }
    double acc = 0.0;
    for (const auto& s : h.tail) acc += std::pow(lp_norm(s, p), r) * dt;
    return std::pow(acc, 1.0 / r);
}

double initial_datum_norm(const HistorySegment& h, double r, double p) {
    return lp_norm(h.head, p) + history_tail_norm(h, r, p);
}

double traj_sup_norm(const Trajectory& w, double t0, double t1, double q) {
    long j0 = w.time_grid.index_of(t0);
    long j1 = w.time_grid.index_of(t1);
    if (j1 < j0) throw std::invalid_argument("traj_sup_norm: empty time window");
    double m = 0.0;
    for (long j = j0; j <= j1; ++j) m = std::max(m, lp_norm(w.state(j), q));
    return m;
}

}  // namespace pdde
