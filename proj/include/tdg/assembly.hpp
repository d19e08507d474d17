#pragma once

#include "tdg/dg_space.hpp"
#include "tdg/fractional.hpp"
#include "tdg/tempered.hpp"

#include <iosfwd>
#include <memory>

namespace tdg
{

/// Which part of the split fractional form an axis contributes:
/// symmetric = (D_L u, D_R v) + (D_L v, D_R u), left_only = (D_L u, D_R v),
/// right_only = (D_L v, D_R u), all of order order/2.
enum class FracForm
{
    symmetric,
    left_only,
    right_only,
};

struct FracAxis
{
    double coeff = 0.0;
    double order = 0.5;
    FracForm form = FracForm::symmetric;
};

/// Linear operator B + A - reaction M with A = fractional + penalty * J0.
struct OperatorModel
{
    FracAxis axis[2];
    double b[2] = {0.0, 0.0};
    double lambda = 0.0;
    double reaction = 0.0;
    double penalty = 1.0;

    /// Operator of the evolution equation: coefficients kappa1 kappa_alpha and
    /// kappa2 kappa_beta, convection b, reaction kappa.
    static OperatorModel evolution(const TemperedParams &params, int dim);
};

SpMat assemble_mass(const DgSpace &space);
SpMat assemble_convection(const DgSpace &space, const double b[2]);
SpMat assemble_penalty(const DgSpace &space);
/// Sum over axes of coeff times the chosen split form; entry (i, j) pairs trial j with test i.
SpMat assemble_fractional(const DgSpace &space, const OperatorModel &model,
                          const FracQuadOptions &opts = {});
SpMat assemble_fractional(const DgSpace &space, const TemperedParams &params,
                          const FracQuadOptions &opts = {});
Eigen::VectorXd assemble_load(const DgSpace &space, const ScalarField &f, int quad_degree = -1);

struct AssembledSystem
{
    std::shared_ptr<const DgSpace> space;
    OperatorModel model;
    SpMat M, S, G, J0;

    /// B + G + penalty J0 - reaction M.
    SpMat operator_matrix() const;
    Eigen::VectorXd apply(const Eigen::VectorXd &u) const;
};

AssembledSystem build_system(std::shared_ptr<const DgSpace> space, const OperatorModel &model,
                             const FracQuadOptions &opts = {});

/// Coordinate text dump, one "row col value" per line.
void write_coordinate(const SpMat &m, std::ostream &os);

} // namespace tdg
