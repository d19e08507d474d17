#pragma once

#include "tdg/mesh.hpp"
#include "tdg/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

namespace tdg
{

using ScalarField = std::function<double(const Point &)>;

/// Quadrature on a physical element: points, weights (including the Jacobian) and the
/// reference coordinates of each point.
struct ElementQuad
{
    std::vector<Point> points;
    std::vector<Point> ref;
    std::vector<double> weights;
};

/// Discontinuous P_N space with a nodal Lagrange basis on equispaced reference nodes.
class DgSpace
{
public:
    DgSpace(std::shared_ptr<const Mesh> mesh, int degree);

    const Mesh &mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    int np() const { return np_; }
    int ndofs() const { return np_ * mesh_->num_elements(); }
    int dof(int e, int j) const { return e * np_ + j; }

    const std::vector<Point> &ref_nodes() const { return ref_nodes_; }
    Point node(int e, int j) const { return mesh_->from_reference(e, ref_nodes_[j]); }

    /// Basis values at a reference point; out has np() entries.
    void basis(const Point &ref, double *out) const;
    /// Reference gradients; gr and gs have np() entries (gs unused in 1D).
    void basis_grad(const Point &ref, double *gr, double *gs) const;
    /// Physical gradient of basis j of element e at a reference point.
    void physical_grad(int e, const Point &ref, double *gx, double *gy) const;

    /// Monomial coefficients (in the reference variables) of each basis function:
    /// column j holds basis j, rows follow monomial_exponents().
    const Eigen::MatrixXd &monomial_coeffs() const { return coeffs_; }
    const std::vector<std::pair<int, int>> &monomial_exponents() const { return exps_; }

    /// Volume rule of the given degree mapped to element e (default 2N+4).
    ElementQuad volume_quad(int e, int quad_degree = -1) const;
    /// Reference mass matrix (unit reference measure); physical block = |J| times this.
    const Eigen::MatrixXd &ref_mass() const { return ref_mass_; }
    double jacobian(int e) const;

    /// Gauss points along face f: parameter in [0,1] from v[0] to v[1], physical points and
    /// weights (length included). 1D faces have a single unit-weight point.
    struct FaceQuad
    {
        std::vector<Point> points;
        std::vector<double> weights;
    };
    FaceQuad face_quad(int f, int quad_degree = -1) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    int np_;
    std::vector<Point> ref_nodes_;
    std::vector<std::pair<int, int>> exps_;
    Eigen::MatrixXd coeffs_;
    Eigen::MatrixXd ref_mass_;
};

/// Element-wise polynomial coefficients in the nodal basis.
class DgFunction
{
public:
    DgFunction() = default;
    explicit DgFunction(std::shared_ptr<const DgSpace> space)
        : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->ndofs()))
    {
    }
    DgFunction(std::shared_ptr<const DgSpace> space, Eigen::VectorXd coeffs);

    const DgSpace &space() const { return *space_; }
    std::shared_ptr<const DgSpace> space_ptr() const { return space_; }
    Eigen::VectorXd &coeffs() { return coeffs_; }
    const Eigen::VectorXd &coeffs() const { return coeffs_; }

    /// Value of the element-e polynomial at a physical point (extrapolates outside e).
    double value(int e, const Point &p) const;
    double value_ref(int e, const Point &ref) const;

    /// Nodal values, one element per line preceded by the element id.
    void dump(std::ostream &os) const;

private:
    std::shared_ptr<const DgSpace> space_;
    Eigen::VectorXd coeffs_;
};

DgFunction l2_project(std::shared_ptr<const DgSpace> space, const ScalarField &f);
DgFunction interpolate(std::shared_ptr<const DgSpace> space, const ScalarField &f);

/// Jump and average at a point of face f: [v] = v|T1 - v|T2, {v} = (v|T1 + v|T2)/2; on
/// boundary faces both equal the interior trace.
std::pair<double, double> trace_jump_average(const DgFunction &u, int face, const Point &p);

double l2_error(const DgFunction &u, const ScalarField &exact, int quad_degree = -1);
double l2_norm(const DgFunction &u);

/// Sum over all faces of the integral of [u]^2 (boundary faces use the interior trace).
double jump_norm_sq(const DgFunction &u);

/// L2 transfer of u onto another space (possibly on a different mesh of the same domain).
DgFunction transfer(const DgFunction &u, std::shared_ptr<const DgSpace> target);

} // namespace tdg
