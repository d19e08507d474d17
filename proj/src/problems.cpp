#include "tdg/problems.hpp"

#include "tdg/error.hpp"
#include "tdg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace tdg
{

namespace
{

constexpr double pi = std::numbers::pi;

// w(x) = x(2-x) and its square, the building block of the polynomial solutions.
SmoothFn bubble_squared(double scale)
{
    SmoothFn g;
    g.f = [scale](double x) {
        const double w = x * (2.0 - x);
        return scale * w * w;
    };
    g.df = [scale](double x) {
        const double w = x * (2.0 - x);
        return scale * 2.0 * w * (2.0 - 2.0 * x);
    };
    g.d2f = [scale](double x) {
        const double w = x * (2.0 - x);
        const double dw = 2.0 - 2.0 * x;
        return scale * (2.0 * dw * dw - 4.0 * w);
    };
    return g;
}

SmoothFn half_sine(double scale)
{
    const double k = pi / 2.0;
    SmoothFn g;
    g.f = [=](double x) { return scale * std::sin(k * x); };
    g.df = [=](double x) { return scale * k * std::cos(k * x); };
    g.d2f = [=](double x) { return -scale * k * k * std::sin(k * x); };
    return g;
}

// (x(2-x))^gamma; the derivative blows up at the endpoints and is returned as 0 there.
SmoothFn power_cap(double gamma)
{
    SmoothFn g;
    g.f = [=](double x) {
        const double w = x * (2.0 - x);
        return w > 0.0 ? std::pow(w, gamma) : 0.0;
    };
    g.df = [=](double x) {
        const double w = x * (2.0 - x);
        return w > 0.0 ? gamma * std::pow(w, gamma - 1.0) * (2.0 - 2.0 * x) : 0.0;
    };
    return g;
}

// x(x-2) exp(-(x-c)^2/width).
SmoothFn gaussian_cap(double c, double width)
{
    SmoothFn g;
    g.f = [=](double x) { return x * (x - 2.0) * std::exp(-(x - c) * (x - c) / width); };
    g.df = [=](double x) {
        const double e = std::exp(-(x - c) * (x - c) / width);
        return e * ((2.0 * x - 2.0) - x * (x - 2.0) * 2.0 * (x - c) / width);
    };
    return g;
}

// Exact solution u = T(t) X(x) Y(y) with separable factors. Y is ignored in 1D.
ExactSolution separable_solution(int dim, const SmoothFn &X, const SmoothFn &Y,
                                 std::function<double(double)> T, std::function<double(double)> dT)
{
    ExactSolution s;
    s.u = [=](const Point &p, double t) { return T(t) * X.f(p[0]) * (dim == 2 ? Y.f(p[1]) : 1.0); };
    s.u_t = [=](const Point &p, double t) { return dT(t) * X.f(p[0]) * (dim == 2 ? Y.f(p[1]) : 1.0); };
    s.grad = [=](const Point &p, double t) {
        const double y = dim == 2 ? Y.f(p[1]) : 1.0;
        return Point{T(t) * X.df(p[0]) * y, dim == 2 ? T(t) * X.f(p[0]) * Y.df(p[1]) : 0.0};
    };
    s.factor = [=](Axis a, double t) {
        const double c = a == Axis::x ? T(t) : 1.0;
        const SmoothFn &g = a == Axis::x ? X : Y;
        SmoothFn out;
        out.f = [g, c](double x) { return c * g.f(x); };
        out.df = [g, c](double x) { return c * g.df(x); };
        if (g.d2f)
            out.d2f = [g, c](double x) { return c * g.d2f(x); };
        return out;
    };
    s.slice = [=](Axis a, const Point &p, double t) {
        SmoothFn base = s.factor(a, t);
        double other = 1.0;
        if (dim == 2)
            other = a == Axis::x ? Y.f(p[1]) : T(t) * X.f(p[0]);
        SmoothFn out;
        out.f = [base, other](double x) { return other * base.f(x); };
        out.df = [base, other](double x) { return other * base.df(x); };
        if (base.d2f)
            out.d2f = [base, other](double x) { return other * base.d2f(x); };
        return out;
    };
    s.time_factor = T;
    s.time_factor_dt = dT;
    return s;
}

ExactSolution arctan_layer_solution()
{
    // u = q(x,y) atan((r-2)/eps), q = x(x-2)y(y-2).
    const double eps = 0.05;
    auto A = [=](double r) { return std::atan((r - 2.0) / eps); };
    auto dA = [=](double r) {
        const double s = (r - 2.0) / eps;
        return 1.0 / (eps * (1.0 + s * s));
    };
    ExactSolution s;
    s.u = [=](const Point &p, double) {
        return p[0] * (p[0] - 2.0) * p[1] * (p[1] - 2.0) * A(std::hypot(p[0], p[1]));
    };
    s.u_t = [](const Point &, double) { return 0.0; };
    s.grad = [=](const Point &p, double) {
        const double x = p[0], y = p[1], r = std::hypot(x, y);
        const double qx = (2.0 * x - 2.0) * y * (y - 2.0), qy = x * (x - 2.0) * (2.0 * y - 2.0);
        const double q = x * (x - 2.0) * y * (y - 2.0);
        const double rx = r > 0.0 ? x / r : 0.0, ry = r > 0.0 ? y / r : 0.0;
        return Point{qx * A(r) + q * dA(r) * rx, qy * A(r) + q * dA(r) * ry};
    };
    s.slice = [=](Axis a, const Point &p, double) {
        const int k = int(a);
        const double other = p[1 - k];
        SmoothFn g;
        auto xy = [k, other](double s_) {
            Point q;
            q[k] = s_;
            q[1 - k] = other;
            return q;
        };
        g.f = [=](double s_) { return s.u(xy(s_), 0.0); };
        g.df = [=](double s_) { return s.grad(xy(s_), 0.0)[k]; };
        return g;
    };
    s.time_factor = [](double) { return 1.0; };
    s.time_factor_dt = [](double) { return 0.0; };
    return s;
}

// Moving bump: factors X_t(x) = x(x-2)exp(-(x-t)^2/w), Y_t likewise.
ExactSolution moving_bump_solution()
{
    const double width = 0.005;
    ExactSolution s;
    auto X = [=](double x, double t) { return x * (x - 2.0) * std::exp(-(x - t) * (x - t) / width); };
    auto Xt = [=](double x, double t) { return X(x, t) * 2.0 * (x - t) / width; };
    s.u = [=](const Point &p, double t) { return X(p[0], t) * X(p[1], t); };
    s.u_t = [=](const Point &p, double t) { return Xt(p[0], t) * X(p[1], t) + X(p[0], t) * Xt(p[1], t); };
    s.grad = [=](const Point &p, double t) {
        return Point{gaussian_cap(t, width).df(p[0]) * X(p[1], t), X(p[0], t) * gaussian_cap(t, width).df(p[1])};
    };
    s.factor = [=](Axis, double t) { return gaussian_cap(t, width); };
    s.slice = [=](Axis a, const Point &p, double t) {
        const double other = X(p[1 - int(a)], t);
        const SmoothFn g = gaussian_cap(t, width);
        SmoothFn out;
        out.f = [g, other](double x) { return other * g.f(x); };
        out.df = [g, other](double x) { return other * g.df(x); };
        return out;
    };
    return s;
}

OperatorModel stationary_model(int dim, double alpha, double beta, double lambda, FracForm form)
{
    OperatorModel m;
    m.axis[0] = {1.0, alpha, form};
    if (dim == 2)
        m.axis[1] = {1.0, beta, form};
    m.lambda = lambda;
    return m;
}

// D_L, D_R or both of a 1D function at x, according to the form.
double form_derivative(const SmoothFn &g, double a, double b, double order, double lambda, double x,
                       FracForm form)
{
    double v = 0.0;
    if (form != FracForm::right_only)
        v += smooth_rl_derivative(g, a, b, order, lambda, x, Side::left);
    if (form != FracForm::left_only)
        v += smooth_rl_derivative(g, a, b, order, lambda, x, Side::right);
    return v;
}

} // namespace

std::vector<std::string> problem_ids()
{
    return {"poly1d", "ex2.1", "ex2.2", "ex3.1", "ex3.2", "ex4", "steady", "zero"};
}

TemperedParams default_params(const std::string &id)
{
    TemperedParams p;
    if (id == "poly1d")
    {
        p.alpha = 0.8;
        p.lambda = 2.0;
        p.kappa1 = 0.1;
        p.b[0] = 0.5;
    }
    else if (id == "ex2.1" || id == "ex2.2")
    {
        p.alpha = id == "ex2.1" ? 0.2 : 1.5;
        p.beta = p.alpha;
        p.lambda = id == "ex2.1" ? 2.0 : 0.2;
        p.kappa1 = 0.1;
        p.kappa2 = 0.2;
        p.b[0] = p.b[1] = 0.5;
    }
    else if (id == "ex3.1")
    {
        p.alpha = 0.8;
        p.lambda = 0.0;
    }
    else if (id == "ex3.2")
    {
        p.alpha = 0.2;
        p.beta = 0.8;
        p.lambda = 0.0;
    }
    else if (id == "ex4" || id == "steady" || id == "zero")
    {
        p.alpha = p.beta = 0.8;
        p.lambda = 0.2;
        p.kappa1 = 0.1;
        p.kappa2 = 0.2;
    }
    else
    {
        throw Error(ErrorKind::config_error, "unknown problem '" + id + "'");
    }
    p.finalize();
    return p;
}

Problem make_problem(const std::string &id, const TemperedParams &params_in)
{
    Problem pr;
    pr.name = id;
    pr.params = params_in;
    pr.params.finalize();
    const TemperedParams &p = pr.params;
    auto expm = [](double t) { return std::exp(-t); };
    auto dexpm = [](double t) { return -std::exp(-t); };
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };

    if (id == "poly1d")
    {
        pr.dim = 1;
        pr.domain = {0.0, 2.0, 0.0, 0.0};
        pr.exact = separable_solution(1, bubble_squared(1.0), {}, expm, dexpm);
    }
    else if (id == "ex2.1")
    {
        pr.exact = separable_solution(2, bubble_squared(1.0), bubble_squared(1.0), expm, dexpm);
    }
    else if (id == "ex2.2")
    {
        pr.exact = separable_solution(2, half_sine(1.0), half_sine(1.0), expm, dexpm);
    }
    else if (id == "ex3.1")
    {
        pr.dim = 1;
        pr.domain = {0.0, 2.0, 0.0, 0.0};
        pr.stationary = true;
        pr.exact = separable_solution(1, power_cap(0.7), {}, one, zero);
    }
    else if (id == "ex3.2")
    {
        pr.stationary = true;
        pr.exact = arctan_layer_solution();
    }
    else if (id == "ex4")
    {
        pr.exact = moving_bump_solution();
    }
    else if (id == "steady")
    {
        pr.exact = separable_solution(2, bubble_squared(1.0), bubble_squared(1.0), one, zero);
    }
    else if (id == "zero")
    {
        pr.source = [](const Point &, double) { return 0.0; };
        pr.initial = [](const Point &) { return 0.0; };
    }
    else
    {
        throw Error(ErrorKind::config_error, "unknown problem '" + id + "'");
    }

    if (id == "ex3.1")
        pr.model = stationary_model(1, p.alpha, p.beta, p.lambda, FracForm::left_only);
    else if (id == "ex3.2")
        pr.model = stationary_model(2, p.alpha, p.beta, p.lambda, FracForm::symmetric);
    else
        pr.model = OperatorModel::evolution(p, pr.dim);

    if (pr.exact)
    {
        pr.source = manufactured_rhs(pr);
        const SpaceTimeField u = pr.exact->u;
        pr.initial = [u](const Point &x) { return u(x, 0.0); };
    }
    return pr;
}

PiecewiseChebyshev::PiecewiseChebyshev(const std::function<double(double)> &f, double a, double b,
                                       double tol, int max_depth)
{
    require(b > a, ErrorKind::invalid_input, "empty interpolation interval");
    std::array<double, n_> nodes;
    for (int j = 0; j < n_; ++j)
        nodes[j] = -std::cos((2.0 * j + 1.0) * pi / (2.0 * n_));

    struct Panel
    {
        double lo, hi;
        int depth;
    };
    std::vector<Panel> stack{{a, b, 0}};
    std::vector<std::pair<double, std::array<double, n_>>> done;
    std::vector<std::pair<double, double>> bounds;
    double scale = 0.0;
    while (!stack.empty())
    {
        const Panel pn = stack.back();
        stack.pop_back();
        std::array<double, n_> v;
        for (int j = 0; j < n_; ++j)
        {
            v[j] = f(0.5 * (pn.lo + pn.hi) + 0.5 * (pn.hi - pn.lo) * nodes[j]);
            scale = std::max(scale, std::abs(v[j]));
        }
        // Chebyshev coefficients; the tail decides acceptance.
        double tail = 0.0;
        for (int k = n_ - 3; k < n_; ++k)
        {
            double c = 0.0;
            for (int j = 0; j < n_; ++j)
                c += v[j] * std::cos(k * (2.0 * j + 1.0) * pi / (2.0 * n_));
            tail = std::max(tail, std::abs(2.0 * c / n_));
        }
        const bool ok = tail <= tol * std::max(scale, 1e-300) || pn.depth >= max_depth;
        if (ok)
        {
            lo_.push_back(pn.lo);
            hi_.push_back(pn.hi);
            vals_.push_back(v);
            continue;
        }
        const double mid = 0.5 * (pn.lo + pn.hi);
        stack.push_back({mid, pn.hi, pn.depth + 1});
        stack.push_back({pn.lo, mid, pn.depth + 1});
    }
    // Panels were emitted left to right by the stack order.
}

double PiecewiseChebyshev::operator()(double x) const
{
    const auto it = std::upper_bound(lo_.begin(), lo_.end(), x);
    std::size_t i = it == lo_.begin() ? 0 : std::size_t(it - lo_.begin()) - 1;
    const double s = std::clamp(2.0 * (x - lo_[i]) / (hi_[i] - lo_[i]) - 1.0, -1.0, 1.0);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n_; ++j)
    {
        const double th = (2.0 * j + 1.0) * pi / (2.0 * n_);
        const double d = s + std::cos(th); // nodes are -cos(th)
        const double w = ((j % 2) ? -1.0 : 1.0) * std::sin(th);
        if (d == 0.0)
            return vals_[i][j];
        num += w / d * vals_[i][j];
        den += w / d;
    }
    return num / den;
}

ExactOperator::ExactOperator(const Problem &problem) : problem_(&problem)
{
    require(problem.exact.has_value(), ErrorKind::invalid_input, "problem has no exact solution");
}

double ExactOperator::fractional_term(int axis, const Point &p, double t)
{
    const Problem &pr = *problem_;
    const FracAxis &fa = pr.model.axis[axis];
    const double lo = pr.domain[2 * axis], hi = pr.domain[2 * axis + 1];
    const double x = p[axis];
    if (!(x > lo && x < hi))
        return 0.0;
    const ExactSolution &ex = *pr.exact;
    if (!ex.factor)
    {
        const SmoothFn g = ex.slice(Axis(axis), p, t);
        return fa.coeff * form_derivative(g, lo, hi, fa.order, pr.model.lambda, x, fa.form);
    }
    auto key = std::make_pair(t, axis);
    auto it = cache_.find(key);
    if (it == cache_.end())
    {
        if (cache_.size() > 16)
            cache_.clear();
        const SmoothFn g = ex.factor(Axis(axis), t);
        const double lam = pr.model.lambda, order = fa.order;
        const FracForm form = fa.form;
        auto interp = std::make_shared<PiecewiseChebyshev>(
            [&](double s) { return form_derivative(g, lo, hi, order, lam, s, form); }, lo, hi, 1e-11, 30);
        it = cache_.emplace(key, interp).first;
    }
    double other = 1.0;
    if (pr.dim == 2)
        other = ex.factor(Axis(1 - axis), t).f(p[1 - axis]);
    return fa.coeff * other * (*it->second)(x);
}

double ExactOperator::operator()(const Point &p, double t)
{
    const Problem &pr = *problem_;
    const ExactSolution &ex = *pr.exact;
    const Point g = ex.grad(p, t);
    double v = pr.model.b[0] * g[0] - pr.model.reaction * ex.u(p, t);
    if (pr.dim == 2)
        v += pr.model.b[1] * g[1];
    for (int a = 0; a < pr.dim; ++a)
        if (pr.model.axis[a].coeff != 0.0)
            v += fractional_term(a, p, t);
    return v;
}

SpaceTimeField manufactured_rhs(const Problem &problem)
{
    auto op = std::make_shared<ExactOperator>(problem);
    const SpaceTimeField ut = problem.exact->u_t;
    if (!problem.stationary)
        return [op, ut](const Point &p, double t) { return ut(p, t) + (*op)(p, t); };
    // Adaptive loops revisit most points; memoise.
    struct Memo
    {
        std::mutex m;
        std::map<std::pair<double, double>, double> v;
    };
    auto memo = std::make_shared<Memo>();
    return [op, ut, memo](const Point &p, double t) {
        const std::pair<double, double> key{p[0], p[1]};
        {
            std::lock_guard<std::mutex> lk(memo->m);
            auto it = memo->v.find(key);
            if (it != memo->v.end())
                return it->second;
        }
        const double r = ut(p, t) + (*op)(p, t);
        std::lock_guard<std::mutex> lk(memo->m);
        memo->v.emplace(key, r);
        return r;
    };
}

SourceField::SourceField(const Problem &problem, std::shared_ptr<const DgSpace> space, int quad_degree)
    : problem_(&problem), space_(std::move(space))
{
    degree_ = quad_degree < 0 ? 2 * space_->degree() + 4 : quad_degree;
    const Mesh &mesh = space_->mesh();
    quad_.reserve(mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e)
        quad_.push_back(space_->volume_quad(e, degree_));
    // Time split: f(x,t) = T'(t)/T(0) u(x,0) + T(t)/T(0) (L u)(x,0).
    const auto &ex = problem.exact;
    if (ex && ex->time_factor && ex->time_factor_dt)
    {
        split_ = true;
        for (const ElementQuad &q : quad_)
            for (const Point &x : q.points)
            {
                split_u_.push_back(ex->u(x, 0.0));
                split_Lu_.push_back(problem.source(x, 0.0) - ex->u_t(x, 0.0));
            }
    }
}

const std::vector<double> &SourceField::samples(double t)
{
    auto it = cache_.find(t);
    if (it != cache_.end())
        return it->second;
    if (cache_.size() > 8)
        cache_.clear();
    std::vector<double> v;
    if (split_)
    {
        const ExactSolution &ex = *problem_->exact;
        const double T0 = ex.time_factor(0.0);
        const double a = ex.time_factor_dt(t) / T0, b = ex.time_factor(t) / T0;
        v.resize(split_u_.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = a * split_u_[i] + b * split_Lu_[i];
    }
    else
    {
        for (const ElementQuad &q : quad_)
            for (const Point &x : q.points)
                v.push_back(problem_->source(x, t));
    }
    return cache_.emplace(t, std::move(v)).first->second;
}

Eigen::VectorXd SourceField::load_from(const std::vector<double> &vals) const
{
    const int np = space_->np();
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space_->ndofs());
    std::vector<double> phi(np);
    std::size_t k = 0;
    for (int e = 0; e < int(quad_.size()); ++e)
    {
        const ElementQuad &q = quad_[e];
        for (std::size_t i = 0; i < q.points.size(); ++i, ++k)
        {
            space_->basis(q.ref[i], phi.data());
            const double wf = q.weights[i] * vals[k];
            for (int j = 0; j < np; ++j)
                F[space_->dof(e, j)] += wf * phi[j];
        }
    }
    return F;
}

Eigen::VectorXd SourceField::load(double t) { return load_from(samples(t)); }

std::vector<double> SourceField::samples_average(double t0, double t1)
{
    const QuadRule1D &g = cached_legendre01(3);
    std::vector<double> avg;
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        const std::vector<double> &s = samples(t0 + (t1 - t0) * g.nodes[i]);
        if (avg.empty())
            avg.assign(s.size(), 0.0);
        for (std::size_t k = 0; k < s.size(); ++k)
            avg[k] += g.weights[i] * s[k];
    }
    return avg;
}

Eigen::VectorXd SourceField::load_average(double t0, double t1) { return load_from(samples_average(t0, t1)); }

double SourceField::time_oscillation(double t0, double t1)
{
    const std::vector<double> avg = samples_average(t0, t1);
    const QuadRule1D &g = cached_legendre01(3);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        const std::vector<double> &s = samples(t0 + (t1 - t0) * g.nodes[i]);
        std::size_t k = 0;
        double sq = 0.0;
        for (const ElementQuad &q : quad_)
            for (std::size_t j = 0; j < q.points.size(); ++j, ++k)
                sq += q.weights[j] * (s[k] - avg[k]) * (s[k] - avg[k]);
        total += g.weights[i] * sq;
    }
    return total;
}

} // namespace tdg
