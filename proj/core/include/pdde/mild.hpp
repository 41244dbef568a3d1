#pragma once

#include <vector>

#include "pdde/coeff.hpp"
#include "pdde/grid.hpp"
#include "pdde/propagator.hpp"

namespace pdde {

enum class Quadrature { left_rectangle, trapezoid };

struct PicardConfig {
    double mu = 0.0;        // 0 selects mu = 4 n^2 K M e^{gamma (T - t0)}
    double tol = 1e-10;
    int max_iters = 200;
    Quadrature quadrature = Quadrature::trapezoid;
    double p = 2.0;         // norm underlying the weighted metric
    bool adaptive = true;   // double mu and restart if contraction fails
};

struct PicardResult {
    Trajectory trajectory;          // spans [t0 - 1, T], history included
    int iterations = 0;
    std::vector<double> ratios;     // d_j / d_{j-1}
    double mu_used = 0.0;
    double K_used = 0.0;
    double M_used = 1.0;
    double gamma_used = 0.0;
};

// quadrature approximation of int_{t0}^{t} U(t, zeta) f(zeta) dzeta;
// f[j] is the integrand at the family's node j, j = 0..index_of(t)
GridFunction duhamel_integral(const EvolutionFamily& fam, double t,
                              const std::vector<GridFunction>& f, Quadrature quad);

/// One application of the contraction map to an iterate v on [t0, T]
/// (v must vanish at t0); result(t0) = 0.
Trajectory gothic_g_apply(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h, const Trajectory& v,
                          Quadrature quad = Quadrature::trapezoid);

// d_mu(u, v) = sup_t e^{-mu (t - t0)} || u(t) - v(t) ||_p
double weighted_metric(const Trajectory& u, const Trajectory& v, double mu, double p);

/// Global Picard iteration on v = u - U(., t0) u0^(1) starting from
/// v = 0, stopping when the d_mu increment drops below tol.
PicardResult solve_picard(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h, const PicardConfig& cfg);

/// One-step Duhamel recursion (translation identity applied per step);
/// the per-step implicitness of the trapezoid rule is resolved by a
/// fixed-point sweep iterated to round-off.
Trajectory solve_marching(const ParameterPoint& a, const EvolutionFamily& fam,
                          const HistorySegment& h,
                          Quadrature quad = Quadrature::trapezoid);

// same recursion started from an arbitrary grid time within the family
Trajectory solve_marching_from(const ParameterPoint& a, const EvolutionFamily& fam,
                               const HistorySegment& h, double start_time,
                               Quadrature quad = Quadrature::trapezoid);

/// Forms R(u)[theta] = (u(theta), u(. + theta) on (-1, 0)), re-solves
/// from theta and returns sup_{t in [theta, T]} ||u(t) - u_theta(t)||_p.
double translation_check(const Trajectory& u, const ParameterPoint& a,
                         const EvolutionFamily& fam, double theta, double p = 2.0,
                         Quadrature quad = Quadrature::trapezoid);

// residual of a trajectory in the Duhamel integral equation at time t
double integral_residual(const Trajectory& u, const ParameterPoint& a,
                         const EvolutionFamily& fam, const HistorySegment& h,
                         double t, double p = 2.0,
                         Quadrature quad = Quadrature::trapezoid);

}  // namespace pdde
