#pragma once

#include "tdg/assembly.hpp"
#include "tdg/problems.hpp"
#include "tdg/solver.hpp"

#include <set>
#include <utility>
#include <vector>

namespace tdg
{

struct IndicatorField
{
    std::vector<double> eta;
    std::vector<double> osc;
    /// (sum eta_T^2)^(1/2) for the energy scheme, sum eta_T for DWR.
    double total = 0.0;
    double eta_time1 = 0.0;
    double eta_time2 = 0.0;

    double sum_sq() const;
    /// Nonnegative finite entries, sizes matching the mesh (internal_error otherwise).
    void validate(int num_elements) const;
};

/// Residual values at volume points of every element.
struct ResidualField
{
    std::vector<ElementQuad> quad;
    std::vector<std::vector<double>> values;

    double norm_sq(int e) const;
    double norm_sq() const;
};

/// Backward-Euler time term (u - u_prev)/tau; u_prev must live on the same space as u.
struct TimeTerm
{
    const DgFunction *u_prev = nullptr;
    double tau = 1.0;
};

/// b.grad u_h + sum over axes of coeff (D_L and/or D_R of the full order) u_h - reaction u_h at
/// points of element e. Orders must lie in (0,1).
std::vector<double> apply_operator(const DgFunction &u, const OperatorModel &model, int e,
                                   const std::vector<Point> &pts);

/// R = f - (u - u_prev)/tau - L u_h at the given points; f holds one value per point, in
/// element order.
ResidualField residual_field(const DgFunction &u, const OperatorModel &model, const std::vector<ElementQuad> &quad,
                             const std::vector<double> &f, const TimeTerm *time = nullptr);
ResidualField residual_field(const DgFunction &u, const OperatorModel &model, const ScalarField &f,
                             int quad_degree = -1, const TimeTerm *time = nullptr);

/// Integral of [u]^2 over each face (boundary faces use the interior trace).
std::vector<double> face_jump_sq(const DgFunction &u, int quad_degree = -1);

/// Exponent of h_T in the residual term: the smallest active order of the model.
double residual_exponent(const OperatorModel &model);

enum class JumpWeight
{
    full, // ||[u_h]||^2 over the whole element boundary
    half, // interior faces split evenly between their two elements
};

/// eta_T^2 = h_T^s ||R||_T^2 + jump term; osc(T) = h_T^(s/2) ||R - Q_h R||_T with Q_h the
/// projection onto degree N-1 (zero for N = 0 is not supported).
IndicatorField energy_indicator(const DgFunction &u, const OperatorModel &model, const ResidualField &R,
                                JumpWeight weight = JumpWeight::full);

/// Goal (phi, w)/||w|| for values w at quadrature points (a zero w gives the zero goal).
GoalLoad weighted_goal(const std::vector<ElementQuad> &quad, const std::vector<std::vector<double>> &w);

struct DwrResult
{
    IndicatorField ind;
    DgFunction z2;
};

/// eta_T = ||R||_T ||z2 - P z2||_T + ||[u_h]||_dT ||[z2 - P z2]||_dT, with z2 the dual
/// solution in degree N+1 and P z2 its element-wise degree-N interpolant. Total = sum eta_T.
DwrResult dwr_indicator(const DgFunction &u, const OperatorModel &model, const ResidualField &R,
                        const GoalLoad &goal, const FracQuadOptions &opts = {});

/// Greedy bulk marking on eta^2, then enlargement on osc^2; ties go to the lower id.
std::set<int> mark_strategy_c(const IndicatorField &ind, double theta1, double theta2);

/// eta / error; undefined_index when the error vanishes.
double effectiveness_index(const IndicatorField &ind, double true_energy_error);

/// (1/tau) int ||f - fbar||^2 dt over [t0,t1] and ||u_n - u_prev||^2.
std::pair<double, double> time_indicators(const DgFunction &u_n, const DgFunction &u_prev, SourceField &f,
                                          double t0, double t1);

} // namespace tdg
