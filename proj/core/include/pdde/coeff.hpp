#pragma once

#include <string>
#include <vector>

#include "pdde/expr.hpp"
#include "pdde/grid.hpp"

namespace pdde {

enum class BcKind { dirichlet, neumann, robin };

BcKind bc_from_string(const std::string& s);
std::string bc_to_string(BcKind k);

/// One element a of the parameter space Y: all coefficient fields of the
/// coupled system plus the declared bounds alpha0 and K.
struct ParameterPoint {
    int n = 1;   // components
    int N = 1;   // spatial dimension

    // a_second[k][i][j] (symmetric in i,j), a_first[k][i], b_first[k][i]
    std::vector<CoeffExpr> a_second;   // n*N*N
    std::vector<CoeffExpr> a_first;    // n*N
    std::vector<CoeffExpr> b_first;    // n*N
    std::vector<CoeffExpr> c0;         // n*n, row-major [k][l]
    std::vector<CoeffExpr> c1;         // n*n
    std::vector<CoeffExpr> d0;         // n, Robin only
    std::vector<BcKind> bc;            // n

    double alpha0 = 0.0;
    double K_bound = 0.0;

    static ParameterPoint laplace(int n, int N, BcKind kind);

    const CoeffExpr& aij(int k, int i, int j) const { return a_second[(k * N + i) * N + j]; }
    CoeffExpr& aij(int k, int i, int j) { return a_second[(k * N + i) * N + j]; }
    const CoeffExpr& ai(int k, int i) const { return a_first[k * N + i]; }
    const CoeffExpr& bi(int k, int i) const { return b_first[k * N + i]; }
    const CoeffExpr& c(int which, int k, int l) const {
        return which == 0 ? c0[k * n + l] : c1[k * n + l];
    }

    bool has_coupling() const;
    bool coupling_time_dependent() const;
    bool higher_order_time_dependent() const;
};

/// One n x n matrix of per-entry sup-norms (or pointwise values).
using MatrixSample = std::vector<double>;   // n*n row-major

// the four-case mixed matrix norm ||g||_{xi,eta}: inner xi-norm over l of
// entry norms, outer eta-norm over k
double matrix_norm(const MatrixSample& g, int n, double xi, double eta);

// c_i(t,.) sampled at grid nodes; entries are per-entry sup over nodes
MatrixSample sample_coupling_matrix(const ParameterPoint& a, int which, double t,
                                    const SpatialGrid& grid);

// component k of result = sum_l c_i^{kl}(t,.) u^l(.)
GridFunction apply_mult(const ParameterPoint& a, int which, double t,
                        const GridFunction& u);

// K = sup over the batch, k,l,i of sampled sup |c_i^{kl}| on the
// space-time grid
double sup_bound_K(const std::vector<ParameterPoint>& batch,
                   const SpatialGrid& grid, const TimeGrid& tg);

// returns base with c0, c1 entries shifted by amp*sin(2*pi*m*t) (time
// mode) or amp*sin(2*pi*m*x1) (space mode); constant shift when m == 0
ParameterPoint weakstar_oscillate(const ParameterPoint& base, long m, double amp,
                                  bool time_mode);

/// Validates assumptions DA1-DA5 on the sampled space-time grid.  Throws
/// std::invalid_argument naming the violated assumption.
void validate_parameter_point(const ParameterPoint& a, const SpatialGrid& grid,
                              const TimeGrid& tg);

}  // namespace pdde
