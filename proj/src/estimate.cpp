#include "tdg/estimate.hpp"

#include "tdg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tdg
{

double IndicatorField::sum_sq() const
{
    double s = 0.0;
    for (double v : eta)
        s += v * v;
    return s;
}

void IndicatorField::validate(int num_elements) const
{
    require(int(eta.size()) == num_elements && int(osc.size()) == num_elements, ErrorKind::internal_error,
            "indicator size does not match the mesh");
    for (std::size_t i = 0; i < eta.size(); ++i)
        require(std::isfinite(eta[i]) && eta[i] >= 0.0 && std::isfinite(osc[i]) && osc[i] >= 0.0,
                ErrorKind::internal_error, "indicator entries must be finite and nonnegative");
}

double ResidualField::norm_sq(int e) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < values[e].size(); ++i)
        s += quad[e].weights[i] * values[e][i] * values[e][i];
    return s;
}

double ResidualField::norm_sq() const
{
    double s = 0.0;
    for (int e = 0; e < int(values.size()); ++e)
        s += norm_sq(e);
    return s;
}

std::vector<double> apply_operator(const DgFunction &u, const OperatorModel &model, int e,
                                   const std::vector<Point> &pts)
{
    const DgSpace &space = u.space();
    const Mesh &mesh = space.mesh();
    const int np = space.np();
    std::vector<double> out(pts.size(), 0.0);
    std::vector<double> gx(np), gy(np);
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        const Point ref = mesh.to_reference(e, pts[i]);
        double v = -model.reaction * u.value_ref(e, ref);
        if (model.b[0] != 0.0 || model.b[1] != 0.0)
        {
            space.physical_grad(e, ref, gx.data(), gy.data());
            for (int j = 0; j < np; ++j)
            {
                const double c = u.coeffs()[space.dof(e, j)];
                v += c * (model.b[0] * gx[j] + (mesh.dim() == 2 ? model.b[1] * gy[j] : 0.0));
            }
        }
        out[i] = v;
    }
    for (int a = 0; a < mesh.dim(); ++a)
    {
        const FracAxis &fa = model.axis[a];
        if (fa.coeff == 0.0)
            continue;
        require(fa.order > 0.0 && fa.order < 1.0, ErrorKind::invalid_order,
                "the strong residual needs orders in (0,1)");
        if (fa.form != FracForm::right_only)
        {
            const auto d = dg_fractional_derivative(u, Axis(a), fa.order, model.lambda, Side::left, e, pts);
            for (std::size_t i = 0; i < pts.size(); ++i)
                out[i] += fa.coeff * d[i];
        }
        if (fa.form != FracForm::left_only)
        {
            const auto d = dg_fractional_derivative(u, Axis(a), fa.order, model.lambda, Side::right, e, pts);
            for (std::size_t i = 0; i < pts.size(); ++i)
                out[i] += fa.coeff * d[i];
        }
    }
    return out;
}

ResidualField residual_field(const DgFunction &u, const OperatorModel &model, const std::vector<ElementQuad> &quad,
                             const std::vector<double> &f, const TimeTerm *time)
{
    const int K = u.space().mesh().num_elements();
    require(int(quad.size()) == K, ErrorKind::internal_error, "quadrature does not match the mesh");
    if (time)
        require(time->u_prev && time->u_prev->coeffs().size() == u.coeffs().size() && time->tau > 0.0,
                ErrorKind::invalid_input, "time term needs u_prev on the same space and tau > 0");
    ResidualField R;
    R.quad = quad;
    R.values.resize(K);
    std::size_t k = 0;
    for (int e = 0; e < K; ++e)
    {
        const ElementQuad &q = quad[e];
        const std::vector<double> Lu = apply_operator(u, model, e, q.points);
        std::vector<double> &r = R.values[e];
        r.resize(q.points.size());
        for (std::size_t i = 0; i < q.points.size(); ++i, ++k)
        {
            require(k < f.size(), ErrorKind::internal_error, "too few source samples");
            double v = f[k] - Lu[i];
            if (time)
                v -= (u.value_ref(e, q.ref[i]) - time->u_prev->value_ref(e, q.ref[i])) / time->tau;
            r[i] = v;
        }
    }
    require(k == f.size(), ErrorKind::internal_error, "too many source samples");
    return R;
}

ResidualField residual_field(const DgFunction &u, const OperatorModel &model, const ScalarField &f, int quad_degree,
                             const TimeTerm *time)
{
    const DgSpace &space = u.space();
    if (quad_degree < 0)
        quad_degree = 2 * space.degree() + 2;
    std::vector<ElementQuad> quad;
    std::vector<double> vals;
    for (int e = 0; e < space.mesh().num_elements(); ++e)
    {
        quad.push_back(space.volume_quad(e, quad_degree));
        for (const Point &p : quad.back().points)
            vals.push_back(f(p));
    }
    return residual_field(u, model, quad, vals, time);
}

std::vector<double> face_jump_sq(const DgFunction &u, int quad_degree)
{
    const DgSpace &space = u.space();
    const auto &faces = space.mesh().faces();
    std::vector<double> out(faces.size(), 0.0);
    for (int f = 0; f < int(faces.size()); ++f)
    {
        const auto fq = space.face_quad(f, quad_degree);
        const Face &face = faces[f];
        for (std::size_t i = 0; i < fq.points.size(); ++i)
        {
            double j = u.value(face.elem[0], fq.points[i]);
            if (!face.boundary())
                j -= u.value(face.elem[1], fq.points[i]);
            out[f] += fq.weights[i] * j * j;
        }
    }
    return out;
}

double residual_exponent(const OperatorModel &model)
{
    double s = 2.0;
    for (const FracAxis &fa : model.axis)
        if (fa.coeff != 0.0)
            s = std::min(s, fa.order);
    return s == 2.0 ? 0.0 : s;
}

namespace
{

// Element sum of face values with the chosen weighting.
std::vector<double> element_face_sum(const Mesh &mesh, const std::vector<double> &face_vals, JumpWeight weight)
{
    std::vector<double> out(mesh.num_elements(), 0.0);
    const auto &faces = mesh.faces();
    for (int f = 0; f < int(faces.size()); ++f)
    {
        const Face &face = faces[f];
        const double c = face.boundary() || weight == JumpWeight::full ? 1.0 : 0.5;
        out[face.elem[0]] += c * face_vals[f];
        if (!face.boundary())
            out[face.elem[1]] += c * face_vals[f];
    }
    return out;
}

// ||R - Q R||^2 on element e, Q the weighted least-squares fit by monomials of degree < N.
double oscillation_sq(const ResidualField &R, int e, int degree, int dim)
{
    const ElementQuad &q = R.quad[e];
    const std::vector<double> &r = R.values[e];
    const int nq = int(q.points.size());
    if (degree <= 0)
        return R.norm_sq(e);
    std::vector<std::pair<int, int>> exps;
    for (int total = 0; total < degree; ++total)
        for (int i = total; i >= 0; --i)
            if (dim == 2 || total - i == 0)
                exps.emplace_back(i, total - i);
    const int m = int(exps.size());
    Eigen::MatrixXd V(nq, m);
    Eigen::VectorXd W(nq), y(nq);
    for (int i = 0; i < nq; ++i)
    {
        for (int j = 0; j < m; ++j)
            V(i, j) = std::pow(q.ref[i][0], exps[j].first) * std::pow(q.ref[i][1], exps[j].second);
        W[i] = q.weights[i];
        y[i] = r[i];
    }
    const Eigen::MatrixXd G = V.transpose() * W.asDiagonal() * V;
    const Eigen::VectorXd c = G.ldlt().solve(V.transpose() * W.asDiagonal() * y);
    const Eigen::VectorXd d = y - V * c;
    return std::max(0.0, d.dot(W.asDiagonal() * d));
}

} // namespace

IndicatorField energy_indicator(const DgFunction &u, const OperatorModel &model, const ResidualField &R,
                                JumpWeight weight)
{
    const Mesh &mesh = u.space().mesh();
    const int K = mesh.num_elements();
    const double s = residual_exponent(model);
    const std::vector<double> jumps = element_face_sum(mesh, face_jump_sq(u), weight);
    IndicatorField ind;
    ind.eta.resize(K);
    ind.osc.resize(K);
    for (int e = 0; e < K; ++e)
    {
        const double hs = std::pow(mesh.diameter(e), s);
        ind.eta[e] = std::sqrt(hs * R.norm_sq(e) + jumps[e]);
        ind.osc[e] = std::sqrt(hs * oscillation_sq(R, e, u.space().degree(), mesh.dim()));
    }
    ind.total = std::sqrt(ind.sum_sq());
    ind.validate(K);
    return ind;
}

GoalLoad weighted_goal(const std::vector<ElementQuad> &quad, const std::vector<std::vector<double>> &w)
{
    double n2 = 0.0;
    for (std::size_t e = 0; e < quad.size(); ++e)
        for (std::size_t i = 0; i < quad[e].weights.size(); ++i)
            n2 += quad[e].weights[i] * w[e][i] * w[e][i];
    const double scale = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
    return [quad, w, scale](const DgSpace &sp) {
        Eigen::VectorXd J = Eigen::VectorXd::Zero(sp.ndofs());
        std::vector<double> phi(sp.np());
        for (int e = 0; e < int(quad.size()); ++e)
            for (std::size_t i = 0; i < quad[e].weights.size(); ++i)
            {
                sp.basis(quad[e].ref[i], phi.data());
                const double c = scale * quad[e].weights[i] * w[e][i];
                for (int j = 0; j < sp.np(); ++j)
                    J[sp.dof(e, j)] += c * phi[j];
            }
        return J;
    };
}

DwrResult dwr_indicator(const DgFunction &u, const OperatorModel &model, const ResidualField &R, const GoalLoad &goal,
                        const FracQuadOptions &opts)
{
    const DgSpace &space = u.space();
    const Mesh &mesh = space.mesh();
    const int K = mesh.num_elements();
    const DualSolution dual = solve_dual_quadratic(space.mesh_ptr(), space.degree(), model, goal, opts);
    const DgSpace &qspace = dual.z.space();

    // d = z2 - (element-wise degree-N interpolant of z2), stored in the enriched space.
    Eigen::VectorXd zN(space.ndofs());
    for (int e = 0; e < K; ++e)
        for (int j = 0; j < space.np(); ++j)
            zN[space.dof(e, j)] = dual.z.value_ref(e, space.ref_nodes()[j]);
    const DgFunction zh(u.space_ptr(), zN);
    Eigen::VectorXd dq(qspace.ndofs());
    for (int e = 0; e < K; ++e)
        for (int j = 0; j < qspace.np(); ++j)
            dq[qspace.dof(e, j)] = dual.z.coeffs()[qspace.dof(e, j)] - zh.value_ref(e, qspace.ref_nodes()[j]);
    const DgFunction d(dual.z.space_ptr(), dq);

    const int fdeg = 2 * qspace.degree() + 2;
    const std::vector<double> uj = element_face_sum(mesh, face_jump_sq(u, fdeg), JumpWeight::full);
    const std::vector<double> dj = element_face_sum(mesh, face_jump_sq(d, fdeg), JumpWeight::full);
    const double s = residual_exponent(model);

    DwrResult out;
    out.z2 = dual.z;
    IndicatorField &ind = out.ind;
    ind.eta.resize(K);
    ind.osc.resize(K);
    for (int e = 0; e < K; ++e)
    {
        const ElementQuad q = qspace.volume_quad(e);
        double dn = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i)
        {
            const double v = d.value_ref(e, q.ref[i]);
            dn += q.weights[i] * v * v;
        }
        ind.eta[e] = std::sqrt(R.norm_sq(e) * dn) + std::sqrt(uj[e] * dj[e]);
        ind.osc[e] = std::sqrt(std::pow(mesh.diameter(e), s) * oscillation_sq(R, e, space.degree(), mesh.dim()));
    }
    ind.total = std::accumulate(ind.eta.begin(), ind.eta.end(), 0.0);
    ind.validate(K);
    return out;
}

std::set<int> mark_strategy_c(const IndicatorField &ind, double theta1, double theta2)
{
    require(theta1 > 0.0 && theta1 < 1.0 && theta2 > 0.0 && theta2 < 1.0, ErrorKind::invalid_input,
            "marking parameters must lie in (0,1)");
    const int K = int(ind.eta.size());
    std::set<int> marked;
    auto greedy = [&](const std::vector<double> &v, double theta) {
        double total = 0.0, have = 0.0;
        for (int e = 0; e < K; ++e)
        {
            total += v[e] * v[e];
            if (marked.count(e))
                have += v[e] * v[e];
        }
        if (total <= 0.0)
            return;
        std::vector<int> order(K);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] * v[a] > v[b] * v[b]; });
        const double target = theta * theta * total;
        for (int e : order)
        {
            if (have >= target)
                break;
            if (marked.insert(e).second)
                have += v[e] * v[e];
        }
    };
    greedy(ind.eta, theta1);
    greedy(ind.osc, theta2);
    return marked;
}

double effectiveness_index(const IndicatorField &ind, double true_energy_error)
{
    if (!(true_energy_error > 0.0) || !std::isfinite(true_energy_error))
        throw Error(ErrorKind::undefined_index, "effectiveness index needs a positive error");
    return ind.total / true_energy_error;
}

std::pair<double, double> time_indicators(const DgFunction &u_n, const DgFunction &u_prev, SourceField &f, double t0,
                                          double t1)
{
    require(t1 > t0, ErrorKind::invalid_input, "empty time interval");
    require(u_n.coeffs().size() == u_prev.coeffs().size(), ErrorKind::invalid_input,
            "time indicator needs both solutions on one space");
    const DgFunction diff(u_n.space_ptr(), u_n.coeffs() - u_prev.coeffs());
    const double n = l2_norm(diff);
    return {f.time_oscillation(t0, t1), n * n};
}

} // namespace tdg
