#include "tdg/solver.hpp"

#include "tdg/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tdg
{

LinearSolver::LinearSolver(const SpMat &A) : n_(int(A.rows())), A_(A)
{
    require(A.rows() == A.cols(), ErrorKind::internal_error, "system matrix is not square");
    A_.makeCompressed();
    dense_ = n_ <= 400 || double(A_.nonZeros()) > 0.04 * double(n_) * double(n_);
    if (dense_)
    {
        dense_lu_.compute(Eigen::MatrixXd(A_));
        // PartialPivLU does not report singularity; estimate the conditioning instead.
        // rcond() misses exactly singular matrices, so the pivot ratio is checked as well.
        const Eigen::VectorXd piv = dense_lu_.matrixLU().diagonal().cwiseAbs();
        const double ratio = n_ > 0 ? piv.minCoeff() / piv.maxCoeff() : 1.0;
        const double rcond = std::min(dense_lu_.rcond(), ratio);
        if (!(rcond > 1e-15))
        {
            std::ostringstream os;
            os << "singular system (reciprocal condition estimate " << rcond << ")";
            throw Error(ErrorKind::solver_failure, os.str());
        }
        return;
    }
    sparse_lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    sparse_lu_->analyzePattern(A_);
    sparse_lu_->factorize(A_);
    if (sparse_lu_->info() != Eigen::Success)
        throw Error(ErrorKind::solver_failure, "sparse factorization failed: " + sparse_lu_->lastErrorMessage());
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd &b) const
{
    require(b.size() == n_, ErrorKind::internal_error, "right-hand side does not match the system");
    Eigen::VectorXd x = dense_ ? Eigen::VectorXd(dense_lu_.solve(b)) : Eigen::VectorXd(sparse_lu_->solve(b));
    const double bn = b.norm();
    if (bn == 0.0)
        return x;
    const double res = (A_ * x - b).norm() / bn;
    if (!(res <= 1e-10))
    {
        std::ostringstream os;
        os << "linear solve residual " << res << " exceeds tolerance";
        throw Error(ErrorKind::solver_failure, os.str());
    }
    return x;
}

DgFunction solve_stationary(const AssembledSystem &sys, const Eigen::VectorXd &load)
{
    const LinearSolver solver(sys.operator_matrix());
    return DgFunction(sys.space, solver.solve(load));
}

EvolutionState BackwardEuler::step(const EvolutionState &state, double tau, const Eigen::VectorXd &load)
{
    require(tau > 0.0, ErrorKind::invalid_input, "time step must be positive");
    require(state.u.coeffs().size() == sys_->M.rows(), ErrorKind::internal_error,
            "state does not live on the system's space");
    if (!solver_ || tau != tau_)
    {
        solver_ = std::make_unique<LinearSolver>(SpMat(sys_->M / tau) + sys_->operator_matrix());
        tau_ = tau;
    }
    EvolutionState next;
    next.t = state.t + tau;
    next.tau = tau;
    next.step = state.step + 1;
    next.u = DgFunction(sys_->space, solver_->solve(sys_->M * state.u.coeffs() / tau + load));
    return next;
}

EvolutionState step_backward_euler(const EvolutionState &state, const AssembledSystem &sys, double tau,
                                   const Eigen::VectorXd &load)
{
    BackwardEuler be(sys);
    return be.step(state, tau, load);
}

DualSolution solve_dual_quadratic(std::shared_ptr<const Mesh> mesh, int primal_degree,
                                  const OperatorModel &model, const GoalLoad &goal,
                                  const FracQuadOptions &opts)
{
    auto space = std::make_shared<DgSpace>(mesh, primal_degree + 1);
    const AssembledSystem sys = build_system(space, model, opts);
    DualSolution out;
    out.matrix = SpMat(sys.operator_matrix().transpose());
    const Eigen::VectorXd J = goal(*space);
    const LinearSolver solver(out.matrix);
    out.z = DgFunction(space, solver.solve(J));
    return out;
}

} // namespace tdg
