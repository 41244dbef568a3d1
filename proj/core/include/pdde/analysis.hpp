#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pdde/coeff.hpp"
#include "pdde/grid.hpp"
#include "pdde/mild.hpp"
#include "pdde/propagator.hpp"

namespace pdde {

/// Constants entering the a-priori bounds.  (M, gamma) are the
/// empirically fitted propagator constants; K the measured coupling sup.
struct BoundInputs {
    double M = 1.0;
    double gamma = 0.0;
    double K = 0.0;
    int n = 1;
    int N = 1;
    double p = 2.0;
    double q = 2.0;
    double r = kInf;
    double T = 1.0;
};

struct EstimateReport {
    std::string bound_name;
    double theoretical = 0.0;
    double measured = 0.0;
    double margin = 0.0;       // theoretical - measured; negative = finding
    BoundInputs inputs;
    bool pass() const { return measured <= theoretical; }
};

struct ScheduleReport {
    int N = 1;
    double p = 1.0, q = 2.0, r0 = 2.0, r_conj = 1.0;
    int m0 = 0;
    int Theta = 0;
    std::vector<double> chain;   // p = p_0 < ... < p_{m0} = q
    bool valid = false;
};

struct ConvergenceStudy {
    std::vector<long> ms;
    std::vector<double> errors;
    double window_lo = 0.0, window_hi = 0.0;
    double q = 2.0;
    bool pass = false;
};

// conjugate exponent, with 1' = inf and inf' = 1
double conjugate_exponent(double p);

// (M e^gamma (1 + n^2 K) exp(n^2 K M e^gamma))^ceil(T)
double gronwall_bound(double M, double gamma, double K, int n, double T);

// the explicit smoothing constant; requires N/2 (1/p - 1/q) < 1/r'
double smoothing_bound_mbar(double M, double gamma, double K, int n, int N,
                            double p, double q, double r);

// bootstrap chain p = p_0 < ... < p_{m0} = q with m0 = ceil(N r') and
// waiting time Theta = ceil(N r0 / (r0 - 1)) (limit value 1 at r0 = inf)
ScheduleReport regularization_schedule(int N, double p, double q, double r0);

EstimateReport verify_gronwall(const Trajectory& traj, const HistorySegment& h,
                               const BoundInputs& c);

EstimateReport verify_smoothing(const Trajectory& traj, const HistorySegment& h,
                                const BoundInputs& c);

struct StudyOptions {
    std::vector<long> ms{1, 2, 4, 8, 16, 32, 64};
    double amp = 0.1;
    bool time_mode = true;
    double q = 2.0;
    double window_lo = 0.0;    // T-hat; 0 selects Theta + 1 + dt
    double trend_slack = 1.5;
    double final_ratio = 0.2;
    Quadrature quadrature = Quadrature::trapezoid;
    int threads = 1;
};

/// Weak-* continuous-dependence study: solves the system for each
/// oscillation index m and records the windowed sup-norm deviation from
/// the base solution.
ConvergenceStudy weakstar_study(const ParameterPoint& base, const SpatialGrid& grid,
                                const TimeGrid& tg, Scheme scheme,
                                const HistorySegment& h, const StudyOptions& opt);

// trend verdict: errors nonincreasing across the ms up to `slack`, and
// final/first <= final_ratio
bool study_trend_pass(const std::vector<double>& errors, double slack,
                      double final_ratio);

/// Method-of-steps oracle for the eigenmode-projected scalar delay ODE
/// y' = (-lambda + c0) y + c1 y(t - 1).  RK4 on the dt grid with the
/// delayed value read from already-computed nodes.
std::vector<double> oracle_method_of_steps(double lambda, double c0, double c1,
                                           const std::function<double(double)>& history,
                                           double T, long steps_per_delay);

/// Cross-check solver: theta-scheme on the fully coupled semidiscrete
/// system, coupling and delay explicit inside the step (no Duhamel
/// splitting).  First-order consistent with the mild solvers.
Trajectory oracle_monolithic(const ParameterPoint& a, const SpatialGrid& grid,
                             const TimeGrid& tg, const HistorySegment& h,
                             Scheme scheme = Scheme::crank_nicolson);

// least-squares slope of log(val) vs log(t)
double loglog_slope(const std::vector<double>& ts, const std::vector<double>& vals);

}  // namespace pdde
