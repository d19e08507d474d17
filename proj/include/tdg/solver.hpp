#pragma once

#include "tdg/assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace tdg
{

/// Direct factorization of a general (nonsymmetric) sparse matrix. The fractional blocks
/// make the operator fairly dense, so dense LU takes over above a fill threshold.
class LinearSolver
{
public:
    explicit LinearSolver(const SpMat &A);
    /// Solves and checks the relative residual (solver_failure beyond 1e-10).
    Eigen::VectorXd solve(const Eigen::VectorXd &b) const;
    int size() const { return n_; }

private:
    int n_ = 0;
    SpMat A_;
    bool dense_ = false;
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> sparse_lu_;
};

/// Solves (B + A - reaction M) u = F.
DgFunction solve_stationary(const AssembledSystem &sys, const Eigen::VectorXd &load);

struct EvolutionState
{
    double t = 0.0;
    double tau = 0.0;
    DgFunction u;
    int step = 0;
};

/// Backward Euler on one assembled system; keeps the factorization of the last step size.
class BackwardEuler
{
public:
    explicit BackwardEuler(const AssembledSystem &sys) : sys_(&sys) {}

    /// (M/tau + B + A - reaction M) u^{n+1} = M u^n / tau + F.
    EvolutionState step(const EvolutionState &state, double tau, const Eigen::VectorXd &load);

private:
    const AssembledSystem *sys_;
    double tau_ = -1.0;
    std::unique_ptr<LinearSolver> solver_;
};

EvolutionState step_backward_euler(const EvolutionState &state, const AssembledSystem &sys,
                                   double tau, const Eigen::VectorXd &load);

/// Load vector of a goal functional in a given space.
using GoalLoad = std::function<Eigen::VectorXd(const DgSpace &)>;

struct DualSolution
{
    DgFunction z;
    SpMat matrix; // transposed operator in the enriched space
};

/// Dual problem in degree N+1 on the same mesh: A^T z = J with the primal model.
DualSolution solve_dual_quadratic(std::shared_ptr<const Mesh> mesh, int primal_degree,
                                  const OperatorModel &model, const GoalLoad &goal,
                                  const FracQuadOptions &opts = {});

} // namespace tdg
