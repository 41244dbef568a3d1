#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdde {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform cell-centered grid on an interval (N=1) or rectangle (N=2).
/// Nodes sit at cell centers; Dirichlet values are ghost constraints,
/// not unknowns.
struct SpatialGrid {
    int dim = 1;                      // N in {1,2}
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> cells{2, 1};   // cells[1] == 1 when dim == 1

    static SpatialGrid interval(double a, double b, int nx);
    static SpatialGrid rectangle(double ax, double bx, double ay, double by,
                                 int nx, int ny);

    double spacing(int axis) const {
        return (hi[axis] - lo[axis]) / cells[axis];
    }
    double cell_volume() const {
        double v = spacing(0);
        if (dim == 2) v *= spacing(1);
        return v;
    }
    double measure() const {
        double v = hi[0] - lo[0];
        if (dim == 2) v *= hi[1] - lo[1];
        return v;
    }
    int num_nodes() const { return cells[0] * cells[1]; }
    // cell-center coordinate along one axis
    double coord(int axis, int i) const {
        return lo[axis] + (i + 0.5) * spacing(axis);
    }
    int node(int ix, int iy) const { return ix + cells[0] * iy; }

    bool same_as(const SpatialGrid& o) const {
        return dim == o.dim && lo == o.lo && hi == o.hi && cells == o.cells;
    }
};

/// Uniform time grid.  dt always divides the unit delay exactly, so a
/// delayed evaluation t - 1 lands on a node.
struct TimeGrid {
    double t0 = 0.0;
    double T = 1.0;
    long steps_per_delay = 1;   // 1/dt
    long steps = 1;             // nodes are t0 + j*dt, j = 0..steps

    static TimeGrid make(double t0, double T, long steps_per_delay);

    double dt() const { return 1.0 / static_cast<double>(steps_per_delay); }
    double time(long j) const { return t0 + j * dt(); }
    // index of a grid time; throws if t is off-grid
    long index_of(double t) const;
    bool on_grid(double t) const;
};

/// An element of the discrete L_p(D)^n: n scalar fields sampled at the
/// grid nodes, stored contiguously component-major.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const SpatialGrid& grid, int n)
        : grid_(grid), n_(n), values_(static_cast<size_t>(n) * grid.num_nodes(), 0.0) {}

    const SpatialGrid& grid() const { return grid_; }
    int components() const { return n_; }
    int nodes() const { return grid_.num_nodes(); }

    double& at(int k, int node) { return values_[static_cast<size_t>(k) * nodes() + node]; }
    double at(int k, int node) const { return values_[static_cast<size_t>(k) * nodes() + node]; }

    double* component(int k) { return values_.data() + static_cast<size_t>(k) * nodes(); }
    const double* component(int k) const { return values_.data() + static_cast<size_t>(k) * nodes(); }

    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }

    GridFunction& axpy(double alpha, const GridFunction& other);
    GridFunction& scale(double alpha);

    bool compatible_with(const GridFunction& o) const {
        return n_ == o.n_ && grid_.same_as(o.grid_);
    }

private:
    SpatialGrid grid_;
    int n_ = 0;
    std::vector<double> values_;
};

/// Initial datum u0 = (u0^(1), u0^(2)): a head state plus a trajectory
/// tail sampled at tau in {-1+dt, ..., -dt, 0-}.
struct HistorySegment {
    GridFunction head;
    std::vector<GridFunction> tail;   // length = steps_per_delay
    double r = 2.0;                   // declared integrability exponent

    // optional explicit sample at tau = -1; without it the lookup at -1
    // clamps to the first tail sample (history is sampled from the left)
    std::vector<GridFunction> at_minus_one;   // empty or one element

    // delayed lookup u0^(2)(tau) at tau = -1 + j*dt for j = 0..S
    const GridFunction& tail_at(long j) const {
        if (tail.empty()) throw std::invalid_argument("empty history tail");
        if (j <= 0) return at_minus_one.empty() ? tail.front() : at_minus_one.front();
        size_t idx = static_cast<size_t>(j) - 1;
        if (idx >= tail.size()) throw std::out_of_range("history index past 0");
        return tail[idx];
    }
};

enum class Provenance { picard, marching, oracle };

/// Time-indexed family of GridFunctions on [t0, T].
struct Trajectory {
    TimeGrid time_grid;
    std::vector<GridFunction> states;   // one per node, size steps + 1
    Provenance provenance = Provenance::marching;

    const GridFunction& state(long j) const { return states.at(static_cast<size_t>(j)); }
    const GridFunction& at_time(double t) const { return state(time_grid.index_of(t)); }
};

// --- norms and pairings -------------------------------------------------

// ||u||_{L_p(D)^n}; p in [1, inf]
double lp_norm(const GridFunction& u, double p);

// <u, v> = sum_k integral u^k v^k
double duality_pairing(const GridFunction& u, const GridFunction& v);

// ||h||_{L_r((-1,0), L_p)}: composite rectangle in time
double history_tail_norm(const HistorySegment& h, double r, double p);

// sum norm on the product space: ||u0^(1)||_p + ||u0^(2)||_{L_r(L_p)}
double initial_datum_norm(const HistorySegment& h, double r, double p);

// sup over grid times in [t0, t1] of ||w(t)||_q
double traj_sup_norm(const Trajectory& w, double t0, double t1, double q);

}  // namespace pdde
