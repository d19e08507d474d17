#include "tdg/assembly.hpp"

#include "tdg/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace tdg
{

OperatorModel OperatorModel::evolution(const TemperedParams &params, int dim)
{
    const RieszConstants rc = riesz_constants(params);
    OperatorModel m;
    m.axis[0] = {params.kappa1 * rc.kappa_alpha, params.alpha, FracForm::symmetric};
    m.b[0] = params.b[0];
    m.lambda = params.lambda;
    m.reaction = 2.0 * std::pow(params.lambda, params.alpha) * params.kappa1 * rc.kappa_alpha;
    if (dim == 2)
    {
        m.axis[1] = {params.kappa2 * rc.kappa_beta, params.beta, FracForm::symmetric};
        m.b[1] = params.b[1];
        m.reaction = rc.kappa;
    }
    return m;
}

namespace
{

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int n, const Triplets &t)
{
    SpMat m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Basis values of element e at a physical point.
void basis_at(const DgSpace &space, int e, const Point &p, double *out)
{
    space.basis(space.mesh().to_reference(e, p), out);
}

} // namespace

SpMat assemble_mass(const DgSpace &space)
{
    const int np = space.np();
    Triplets t;
    for (int e = 0; e < space.mesh().num_elements(); ++e)
    {
        const double J = space.jacobian(e);
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j)
                t.emplace_back(space.dof(e, i), space.dof(e, j), J * space.ref_mass()(i, j));
    }
    return from_triplets(space.ndofs(), t);
}

SpMat assemble_convection(const DgSpace &space, const double b[2])
{
    const Mesh &mesh = space.mesh();
    const int np = space.np();
    const double bx = b[0], by = mesh.dim() == 2 ? b[1] : 0.0;
    Triplets t;
    if (bx == 0.0 && by == 0.0)
        return from_triplets(space.ndofs(), t);
    std::vector<double> phi(np), gx(np), gy(np), pa(np), pb(np);

    // Volume term -(b u, grad v).
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        const ElementQuad q = space.volume_quad(e);
        Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(np, np);
        for (std::size_t k = 0; k < q.points.size(); ++k)
        {
            space.basis(q.ref[k], phi.data());
            space.physical_grad(e, q.ref[k], gx.data(), gy.data());
            for (int i = 0; i < np; ++i)
            {
                const double bgrad = bx * gx[i] + by * gy[i];
                for (int j = 0; j < np; ++j)
                    blk(i, j) -= q.weights[k] * bgrad * phi[j];
            }
        }
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j)
                t.emplace_back(space.dof(e, i), space.dof(e, j), blk(i, j));
    }

    // Face term b.n u_up [v]; the exterior trace is zero on the boundary.
    for (int f = 0; f < int(mesh.faces().size()); ++f)
    {
        const Face &face = mesh.faces()[f];
        const double bn = bx * face.normal[0] + by * face.normal[1];
        const int up = bn >= 0.0 ? face.elem[0] : face.elem[1];
        if (up < 0)
            continue;
        const auto fq = space.face_quad(f);
        for (std::size_t k = 0; k < fq.points.size(); ++k)
        {
            basis_at(space, up, fq.points[k], pa.data());
            const double w = fq.weights[k] * bn;
            for (int side = 0; side < 2; ++side)
            {
                const int te = face.elem[side];
                if (te < 0)
                    continue;
                basis_at(space, te, fq.points[k], pb.data());
                const double sgn = side == 0 ? 1.0 : -1.0;
                for (int i = 0; i < np; ++i)
                    for (int j = 0; j < np; ++j)
                        t.emplace_back(space.dof(te, i), space.dof(up, j), sgn * w * pb[i] * pa[j]);
            }
        }
    }
    return from_triplets(space.ndofs(), t);
}

SpMat assemble_penalty(const DgSpace &space)
{
    const Mesh &mesh = space.mesh();
    const int np = space.np();
    Triplets t;
    std::vector<double> v[2] = {std::vector<double>(np), std::vector<double>(np)};
    for (int f = 0; f < int(mesh.faces().size()); ++f)
    {
        const Face &face = mesh.faces()[f];
        const auto fq = space.face_quad(f);
        const int ns = face.boundary() ? 1 : 2;
        for (std::size_t k = 0; k < fq.points.size(); ++k)
        {
            for (int s = 0; s < ns; ++s)
                basis_at(space, face.elem[s], fq.points[k], v[s].data());
            for (int a = 0; a < ns; ++a)
                for (int c = 0; c < ns; ++c)
                {
                    const double sgn = a == c ? 1.0 : -1.0;
                    for (int i = 0; i < np; ++i)
                        for (int j = 0; j < np; ++j)
                            t.emplace_back(space.dof(face.elem[a], i), space.dof(face.elem[c], j),
                                           sgn * fq.weights[k] * v[a][i] * v[c][j]);
                }
        }
    }
    return from_triplets(space.ndofs(), t);
}

SpMat assemble_fractional(const DgSpace &space, const OperatorModel &model, const FracQuadOptions &opts)
{
    SpMat G(space.ndofs(), space.ndofs());
    for (int a = 0; a < space.mesh().dim(); ++a)
    {
        const FracAxis &ax = model.axis[a];
        if (ax.coeff == 0.0)
            continue;
        require(ax.order > 0.0 && ax.order < 2.0 && ax.order != 1.0, ErrorKind::invalid_order,
                "fractional order must lie in (0,2) without 1");
        const SpMat P =
            fractional_pairing(space, Axis(a), 0.5 * ax.order, model.lambda, Pairing::left_right, opts);
        switch (ax.form)
        {
        case FracForm::symmetric:
            G += ax.coeff * (P + SpMat(P.transpose()));
            break;
        case FracForm::left_only:
            G += ax.coeff * P;
            break;
        case FracForm::right_only:
            G += ax.coeff * SpMat(P.transpose());
            break;
        }
    }
    return G;
}

SpMat assemble_fractional(const DgSpace &space, const TemperedParams &params, const FracQuadOptions &opts)
{
    return assemble_fractional(space, OperatorModel::evolution(params, space.mesh().dim()), opts);
}

Eigen::VectorXd assemble_load(const DgSpace &space, const ScalarField &f, int quad_degree)
{
    const int np = space.np();
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space.ndofs());
    std::vector<double> phi(np);
    for (int e = 0; e < space.mesh().num_elements(); ++e)
    {
        const ElementQuad q = space.volume_quad(e, quad_degree);
        for (std::size_t k = 0; k < q.points.size(); ++k)
        {
            const double fv = f(q.points[k]);
            require(std::isfinite(fv), ErrorKind::input_error, "non-finite load sample");
            space.basis(q.ref[k], phi.data());
            for (int i = 0; i < np; ++i)
                F[space.dof(e, i)] += q.weights[k] * fv * phi[i];
        }
    }
    return F;
}

SpMat AssembledSystem::operator_matrix() const
{
    SpMat A = S + G + model.penalty * J0;
    if (model.reaction != 0.0)
        A -= model.reaction * M;
    return A;
}

Eigen::VectorXd AssembledSystem::apply(const Eigen::VectorXd &u) const
{
    require(u.size() == M.rows(), ErrorKind::internal_error, "vector does not match the system");
    Eigen::VectorXd r = S * u + G * u + model.penalty * (J0 * u);
    if (model.reaction != 0.0)
        r -= model.reaction * (M * u);
    return r;
}

AssembledSystem build_system(std::shared_ptr<const DgSpace> space, const OperatorModel &model,
                             const FracQuadOptions &opts)
{
    AssembledSystem sys;
    sys.space = space;
    sys.model = model;
    sys.M = assemble_mass(*space);
    sys.S = assemble_convection(*space, model.b);
    sys.G = assemble_fractional(*space, model, opts);
    sys.J0 = assemble_penalty(*space);
    const auto n = sys.M.rows();
    require(sys.S.rows() == n && sys.G.rows() == n && sys.J0.rows() == n, ErrorKind::internal_error,
            "operator blocks differ in size");
    return sys;
}

void write_coordinate(const SpMat &m, std::ostream &os)
{
    os << std::setprecision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

} // namespace tdg
