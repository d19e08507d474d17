#include "tdg/dg_space.hpp"

#include "tdg/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace tdg
{

namespace
{

double ipow(double x, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i)
        r *= x;
    return r;
}

QuadRule1D line_rule(int degree) { return gauss_legendre01(degree / 2 + 1); }

} // namespace

DgSpace::DgSpace(std::shared_ptr<const Mesh> mesh, int degree) : mesh_(std::move(mesh)), degree_(degree)
{
    require(mesh_ != nullptr, ErrorKind::invalid_input, "space needs a mesh");
    require(degree >= 0 && degree <= 6, ErrorKind::invalid_input, "degree must lie in [0,6]");
    const int N = degree;
    if (mesh_->dim() == 1)
    {
        for (int i = 0; i <= N; ++i)
        {
            ref_nodes_.push_back({N == 0 ? 0.5 : double(i) / N, 0.0});
            exps_.push_back({i, 0});
        }
    }
    else
    {
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i + j <= N; ++i)
                ref_nodes_.push_back({N == 0 ? 1.0 / 3.0 : double(i) / N, N == 0 ? 1.0 / 3.0 : double(j) / N});
        for (int d = 0; d <= N; ++d)
            for (int b = 0; b <= d; ++b)
                exps_.push_back({d - b, b});
    }
    np_ = int(ref_nodes_.size());
    Eigen::MatrixXd V(np_, np_);
    for (int i = 0; i < np_; ++i)
        for (int m = 0; m < np_; ++m)
            V(i, m) = ipow(ref_nodes_[i][0], exps_[m].first) * ipow(ref_nodes_[i][1], exps_[m].second);
    coeffs_ = V.inverse();

    ref_mass_ = Eigen::MatrixXd::Zero(np_, np_);
    std::vector<double> phi(np_);
    auto accumulate = [&](const Point &r, double w) {
        basis(r, phi.data());
        for (int i = 0; i < np_; ++i)
            for (int j = 0; j < np_; ++j)
                ref_mass_(i, j) += w * phi[i] * phi[j];
    };
    if (mesh_->dim() == 1)
    {
        const QuadRule1D rule = line_rule(2 * N);
        for (std::size_t q = 0; q < rule.size(); ++q)
            accumulate({rule.nodes[q], 0.0}, rule.weights[q]);
    }
    else
    {
        const TriangleRule rule = triangle_rule(2 * N);
        for (std::size_t q = 0; q < rule.size(); ++q)
            accumulate(rule.points[q], rule.weights[q]);
    }
}

void DgSpace::basis(const Point &ref, double *out) const
{
    double mono[64];
    for (int m = 0; m < np_; ++m)
        mono[m] = ipow(ref[0], exps_[m].first) * ipow(ref[1], exps_[m].second);
    for (int j = 0; j < np_; ++j)
    {
        double s = 0.0;
        for (int m = 0; m < np_; ++m)
            s += coeffs_(m, j) * mono[m];
        out[j] = s;
    }
}

void DgSpace::basis_grad(const Point &ref, double *gr, double *gs) const
{
    double dr[64], ds[64];
    for (int m = 0; m < np_; ++m)
    {
        const auto [a, b] = exps_[m];
        dr[m] = a == 0 ? 0.0 : a * ipow(ref[0], a - 1) * ipow(ref[1], b);
        ds[m] = b == 0 ? 0.0 : b * ipow(ref[0], a) * ipow(ref[1], b - 1);
    }
    for (int j = 0; j < np_; ++j)
    {
        double sr = 0.0, ss = 0.0;
        for (int m = 0; m < np_; ++m)
        {
            sr += coeffs_(m, j) * dr[m];
            ss += coeffs_(m, j) * ds[m];
        }
        gr[j] = sr;
        if (gs)
            gs[j] = ss;
    }
}

void DgSpace::physical_grad(int e, const Point &ref, double *gx, double *gy) const
{
    double gr[64], gs[64];
    basis_grad(ref, gr, gs);
    const auto &v = mesh_->element(e);
    const Point &p0 = mesh_->vertex(v[0]), &p1 = mesh_->vertex(v[1]);
    if (mesh_->dim() == 1)
    {
        const double len = p1[0] - p0[0];
        for (int j = 0; j < np_; ++j)
        {
            gx[j] = gr[j] / len;
            gy[j] = 0.0;
        }
        return;
    }
    const Point &p2 = mesh_->vertex(v[2]);
    const double a = p1[0] - p0[0], b = p2[0] - p0[0], c = p1[1] - p0[1], d = p2[1] - p0[1];
    const double det = a * d - b * c;
    // grad_x = A^{-T} grad_r with A = [[a b],[c d]].
    for (int j = 0; j < np_; ++j)
    {
        gx[j] = (d * gr[j] - c * gs[j]) / det;
        gy[j] = (-b * gr[j] + a * gs[j]) / det;
    }
}

double DgSpace::jacobian(int e) const
{
    return mesh_->dim() == 1 ? mesh_->area(e) : 2.0 * mesh_->area(e);
}

ElementQuad DgSpace::volume_quad(int e, int quad_degree) const
{
    if (quad_degree < 0)
        quad_degree = 2 * degree_ + 4;
    ElementQuad q;
    const double J = jacobian(e);
    if (mesh_->dim() == 1)
    {
        const QuadRule1D rule = line_rule(quad_degree);
        for (std::size_t i = 0; i < rule.size(); ++i)
        {
            const Point r = {rule.nodes[i], 0.0};
            q.ref.push_back(r);
            q.points.push_back(mesh_->from_reference(e, r));
            q.weights.push_back(J * rule.weights[i]);
        }
        return q;
    }
    const TriangleRule rule = triangle_rule(quad_degree);
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        q.ref.push_back(rule.points[i]);
        q.points.push_back(mesh_->from_reference(e, rule.points[i]));
        q.weights.push_back(J * rule.weights[i]);
    }
    return q;
}

DgSpace::FaceQuad DgSpace::face_quad(int f, int quad_degree) const
{
    FaceQuad out;
    const Face &face = mesh_->faces()[f];
    if (mesh_->dim() == 1)
    {
        out.points.push_back(mesh_->vertex(face.v[0]));
        out.weights.push_back(1.0);
        return out;
    }
    if (quad_degree < 0)
        quad_degree = 2 * degree_ + 2;
    const QuadRule1D &rule = cached_legendre01(quad_degree / 2 + 1);
    const Point &a = mesh_->vertex(face.v[0]), &b = mesh_->vertex(face.v[1]);
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        const double t = rule.nodes[i];
        out.points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        out.weights.push_back(rule.weights[i] * face.length);
    }
    return out;
}

// ---------------------------------------------------------------------------

DgFunction::DgFunction(std::shared_ptr<const DgSpace> space, Eigen::VectorXd coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs))
{
    require(coeffs_.size() == space_->ndofs(), ErrorKind::internal_error,
            "coefficient vector does not match the space");
}

double DgFunction::value_ref(int e, const Point &ref) const
{
    double phi[64];
    space_->basis(ref, phi);
    double s = 0.0;
    for (int j = 0; j < space_->np(); ++j)
        s += phi[j] * coeffs_[space_->dof(e, j)];
    return s;
}

double DgFunction::value(int e, const Point &p) const
{
    return value_ref(e, space_->mesh().to_reference(e, p));
}

void DgFunction::dump(std::ostream &os) const
{
    os << std::setprecision(17);
    for (int e = 0; e < space_->mesh().num_elements(); ++e)
    {
        os << e;
        for (int j = 0; j < space_->np(); ++j)
            os << ' ' << coeffs_[space_->dof(e, j)];
        os << '\n';
    }
}

namespace
{

double checked(double v)
{
    require(std::isfinite(v), ErrorKind::input_error, "non-finite field sample");
    return v;
}

} // namespace

DgFunction l2_project(std::shared_ptr<const DgSpace> space, const ScalarField &f)
{
    DgFunction u(space);
    const int np = space->np();
    Eigen::LLT<Eigen::MatrixXd> mass(space->ref_mass());
    std::vector<double> phi(np);
    for (int e = 0; e < space->mesh().num_elements(); ++e)
    {
        const ElementQuad q = space->volume_quad(e);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np);
        for (std::size_t i = 0; i < q.points.size(); ++i)
        {
            const double fv = checked(f(q.points[i]));
            space->basis(q.ref[i], phi.data());
            for (int j = 0; j < np; ++j)
                rhs[j] += q.weights[i] * fv * phi[j];
        }
        u.coeffs().segment(e * np, np) = mass.solve(rhs) / space->jacobian(e);
    }
    return u;
}

DgFunction interpolate(std::shared_ptr<const DgSpace> space, const ScalarField &f)
{
    DgFunction u(space);
    for (int e = 0; e < space->mesh().num_elements(); ++e)
        for (int j = 0; j < space->np(); ++j)
            u.coeffs()[space->dof(e, j)] = checked(f(space->node(e, j)));
    return u;
}

std::pair<double, double> trace_jump_average(const DgFunction &u, int face, const Point &p)
{
    const Mesh &mesh = u.space().mesh();
    require(face >= 0 && face < int(mesh.faces().size()), ErrorKind::input_error, "unknown face");
    const Face &f = mesh.faces()[face];
    if (mesh.dim() == 1)
    {
        require(std::abs(p[0] - mesh.vertex(f.v[0])[0]) <= 1e-12, ErrorKind::input_error,
                "point is not on the face");
    }
    else
    {
        const Point &a = mesh.vertex(f.v[0]), &b = mesh.vertex(f.v[1]);
        const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        const double t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) /
                         (f.length * f.length);
        require(std::abs(cross) <= 1e-10 * f.length * f.length && t >= -1e-10 && t <= 1.0 + 1e-10,
                ErrorKind::input_error, "point is not on the face");
    }
    const double v1 = u.value(f.elem[0], p);
    if (f.boundary())
        return {v1, v1};
    const double v2 = u.value(f.elem[1], p);
    return {v1 - v2, 0.5 * (v1 + v2)};
}

double l2_error(const DgFunction &u, const ScalarField &exact, int quad_degree)
{
    const DgSpace &space = u.space();
    double s = 0.0;
    for (int e = 0; e < space.mesh().num_elements(); ++e)
    {
        const ElementQuad q = space.volume_quad(e, quad_degree < 0 ? 2 * space.degree() + 4 : quad_degree);
        for (std::size_t i = 0; i < q.points.size(); ++i)
        {
            const double d = u.value_ref(e, q.ref[i]) - exact(q.points[i]);
            s += q.weights[i] * d * d;
        }
    }
    return std::sqrt(s);
}

double l2_norm(const DgFunction &u)
{
    return l2_error(u, [](const Point &) { return 0.0; });
}

double jump_norm_sq(const DgFunction &u)
{
    const DgSpace &space = u.space();
    double s = 0.0;
    for (int f = 0; f < int(space.mesh().faces().size()); ++f)
    {
        const auto fq = space.face_quad(f);
        const Face &face = space.mesh().faces()[f];
        for (std::size_t i = 0; i < fq.points.size(); ++i)
        {
            double j = u.value(face.elem[0], fq.points[i]);
            if (!face.boundary())
                j -= u.value(face.elem[1], fq.points[i]);
            s += fq.weights[i] * j * j;
        }
    }
    return s;
}

DgFunction transfer(const DgFunction &u, std::shared_ptr<const DgSpace> target)
{
    PointLocator locate(u.space().mesh());
    return l2_project(target, [&](const Point &p) {
        const int e = locate.locate(p);
        require(e >= 0, ErrorKind::internal_error, "transfer point outside the source mesh");
        return u.value(e, p);
    });
}

} // namespace tdg
