#include "tdg/adapt.hpp"
#include "tdg/error.hpp"
#include "tdg/fractional.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tdg;

namespace
{

IndicatorField field(std::vector<double> eta)
{
    IndicatorField f;
    f.osc.assign(eta.size(), 0.0);
    f.eta = std::move(eta);
    return f;
}

template <class F>
ErrorKind kind_of(F &&f)
{
    try
    {
        f();
    }
    catch (const Error &e)
    {
        return e.kind();
    }
    return ErrorKind::internal_error;
}

std::shared_ptr<const Mesh> square(int n)
{
    return std::make_shared<Mesh>(build_structured_tri_mesh(0, 2, 0, 2, n, n));
}

} // namespace

TEST_CASE("marking strategy C")
{
    SUBCASE("one dominant element covers half the estimate")
    {
        // 16 >= 0.5 * 30 after the first element.
        const std::set<int> m = mark_strategy_c(field({4, 3, 2, 1}), 0.5, 0.5);
        CHECK(m == std::set<int>{0});
    }
    SUBCASE("equal indicators mark the smallest sufficient count, lowest ids first")
    {
        for (int K : {4, 7, 10})
        {
            const std::set<int> m = mark_strategy_c(field(std::vector<double>(K, 1.0)), 0.5, 0.5);
            CHECK(int(m.size()) == int(std::ceil(0.25 * K)));
            CHECK(*m.begin() == 0);
        }
    }
    SUBCASE("oscillation enlarges the marked set")
    {
        IndicatorField f = field({4, 3, 2, 1});
        f.osc = {0, 0, 0, 5};
        CHECK(mark_strategy_c(f, 0.5, 0.5) == std::set<int>{0, 3});
    }
    SUBCASE("marked set carries theta^2 of the estimate for random indicators")
    {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial)
        {
            std::vector<double> eta(20);
            for (double &v : eta)
                v = U(rng);
            const IndicatorField f = field(eta);
            const std::set<int> m = mark_strategy_c(f, 0.4, 0.5);
            double in = 0.0;
            for (int e : m)
                in += eta[e] * eta[e];
            CHECK(in >= 0.16 * f.sum_sq() - 1e-14);
            // Minimal: dropping the smallest marked element falls short.
            double smallest = 1e9;
            for (int e : m)
                smallest = std::min(smallest, eta[e] * eta[e]);
            CHECK(in - smallest < 0.16 * f.sum_sq());
        }
    }
}

TEST_CASE("effectiveness index")
{
    IndicatorField f;
    f.total = 3.5025;
    CHECK(effectiveness_index(f, 1.2608) == doctest::Approx(2.7781).epsilon(1e-4));
    f.total = 1.0679;
    CHECK(effectiveness_index(f, 1.2608) == doctest::Approx(0.8470).epsilon(1e-4));
    CHECK(kind_of([&] { effectiveness_index(f, 0.0); }) == ErrorKind::undefined_index);
}

TEST_CASE("indicator fields are validated")
{
    IndicatorField f = field({1.0, 2.0});
    CHECK_NOTHROW(f.validate(2));
    CHECK(kind_of([&] { f.validate(3); }) == ErrorKind::internal_error);
    f.eta[1] = std::nan("");
    CHECK(kind_of([&] { f.validate(2); }) == ErrorKind::internal_error);
}

TEST_CASE("time oscillation of a linear-in-time source")
{
    // f = t on [0,tau]: (1/tau) int |t - tau/2|^2 dt * |Omega| = tau^2/12 * 4.
    Problem p = make_problem("zero", default_params("zero"));
    p.source = [](const Point &, double t) { return t; };
    auto space = std::make_shared<DgSpace>(square(2), 1);
    SourceField sf(p, space);
    for (double tau : {0.1, 0.3, 1.0})
        CHECK(sf.time_oscillation(0.0, tau) == doctest::Approx(tau * tau / 3).epsilon(1e-12));
    const DgFunction u = l2_project(space, [](const Point &x) { return x[0]; });
    const DgFunction v = l2_project(space, [](const Point &x) { return x[0] + 0.5; });
    const auto [e1, e2] = time_indicators(u, v, sf, 0.0, 0.2);
    CHECK(e1 == doctest::Approx(0.04 / 3).epsilon(1e-12));
    CHECK(e2 == doctest::Approx(0.25 * 4).epsilon(1e-12));
}

TEST_CASE("residual is affine in the source")
{
    const Problem p = make_problem("ex2.1", default_params("ex2.1"));
    auto space = std::make_shared<DgSpace>(square(3), 1);
    const DgFunction u = l2_project(space, [&](const Point &x) { return p.exact->u(x, 0.0); });
    const ScalarField f = [&](const Point &x) { return p.source(x, 0.0); };
    const ResidualField R0 = residual_field(u, p.model, f);
    const ResidualField R1 = residual_field(u, p.model, [&](const Point &x) { return f(x) + 1.0; });
    double worst = 0.0;
    for (std::size_t e = 0; e < R0.values.size(); ++e)
        for (std::size_t i = 0; i < R0.values[e].size(); ++i)
            worst = std::max(worst, std::abs(R1.values[e][i] - R0.values[e][i] - 1.0));
    CHECK(worst <= 1e-12);
}

TEST_CASE("residual of the exact polynomial solution vanishes")
{
    // Zero operator input: the residual equals the source.
    const Problem p = make_problem("ex2.1", default_params("ex2.1"));
    auto space = std::make_shared<DgSpace>(square(2), 2);
    const DgFunction zero(space);
    const ResidualField R = residual_field(zero, p.model, [](const Point &x) { return x[0] * x[1]; });
    for (std::size_t e = 0; e < R.values.size(); ++e)
        for (std::size_t i = 0; i < R.values[e].size(); ++i)
            CHECK(R.values[e][i] == doctest::Approx(R.quad[e].points[i][0] * R.quad[e].points[i][1]));
}

TEST_CASE("energy indicator of a constant residual")
{
    const Problem p = make_problem("ex2.1", default_params("ex2.1"));
    auto mesh = square(3);
    auto space = std::make_shared<DgSpace>(mesh, 1);
    const DgFunction zero(space);
    const double c = 0.7;
    const ResidualField R = residual_field(zero, p.model, [&](const Point &) { return c; });
    const IndicatorField ind = energy_indicator(zero, p.model, R);
    const double s = residual_exponent(p.model);
    CHECK(s == doctest::Approx(0.2));
    for (int e = 0; e < mesh->num_elements(); ++e)
    {
        CHECK(ind.osc[e] <= 1e-13);
        CHECK(ind.eta[e] * ind.eta[e] ==
              doctest::Approx(std::pow(mesh->diameter(e), s) * c * c * mesh->area(e)).epsilon(1e-12));
    }
    CHECK(ind.total == doctest::Approx(std::sqrt(ind.sum_sq())));
}

TEST_CASE("jump weights: interior faces counted twice or split")
{
    auto mesh = std::make_shared<Mesh>(build_interval_mesh(0, 2, 5));
    auto space = std::make_shared<DgSpace>(mesh, 1);
    DgFunction u(space);
    for (int e = 0; e < 5; ++e)
        u.coeffs()[space->dof(e, 0)] = u.coeffs()[space->dof(e, 1)] = e + 1.0;
    const std::vector<double> fj = face_jump_sq(u);
    double interior = 0.0, boundary = 0.0;
    for (int f = 0; f < int(mesh->faces().size()); ++f)
        (mesh->faces()[f].elem[1] < 0 ? boundary : interior) += fj[f];
    CHECK(interior == doctest::Approx(4.0));
    CHECK(boundary == doctest::Approx(1.0 + 25.0));

    const Problem p = make_problem("poly1d", default_params("poly1d"));
    ResidualField R;
    for (int e = 0; e < 5; ++e)
    {
        R.quad.push_back(space->volume_quad(e));
        R.values.emplace_back(R.quad.back().points.size(), 0.0);
    }
    CHECK(energy_indicator(u, p.model, R, JumpWeight::full).sum_sq() == doctest::Approx(2 * interior + boundary));
    CHECK(energy_indicator(u, p.model, R, JumpWeight::half).sum_sq() == doctest::Approx(interior + boundary));
}

TEST_CASE("dual weighted indicator")
{
    const Problem p = make_problem("ex3.1", default_params("ex3.1"));
    auto mesh = std::make_shared<Mesh>(build_interval_mesh(0, 2, 8));
    auto space = std::make_shared<DgSpace>(mesh, 1);
    SourceField load(p, space);
    const AssembledSystem sys = build_system(space, p.model);
    const DgFunction u = solve_stationary(sys, load.load(0.0));
    SourceField rs(p, space, 4);
    const ResidualField R = residual_field(u, p.model, rs.quad(), rs.samples(0.0));

    SUBCASE("a zero goal gives zero indicators")
    {
        std::vector<std::vector<double>> w(R.values.size());
        for (std::size_t e = 0; e < w.size(); ++e)
            w[e].assign(R.values[e].size(), 0.0);
        const DwrResult d = dwr_indicator(u, p.model, R, weighted_goal(R.quad, w));
        CHECK(d.ind.total == 0.0);
        for (double v : d.ind.eta)
            CHECK(v == 0.0);
    }
    SUBCASE("residual goal is positive and sums element contributions")
    {
        const DwrResult d = dwr_indicator(u, p.model, R, weighted_goal(R.quad, R.values));
        double sum = 0.0;
        for (double v : d.ind.eta)
        {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(d.ind.total == doctest::Approx(sum));
        CHECK(d.ind.total > 0.0);
        CHECK(d.z2.space().degree() == 2);
    }
    SUBCASE("largest indicators sit at the singular endpoints")
    {
        for (bool dwr : {false, true})
        {
            const IndicatorField ind = dwr ? dwr_indicator(u, p.model, R, weighted_goal(R.quad, R.values)).ind
                                           : energy_indicator(u, p.model, R);
            const int arg = int(std::max_element(ind.eta.begin(), ind.eta.end()) - ind.eta.begin());
            CHECK((arg == 0 || arg == 7));
        }
    }
}

TEST_CASE("inverse inequality scaling on one element")
{
    // |v|_{H^a(0,h)} / ||v|| ~ h^-a for polynomials; v(0) = 0 keeps D^0.8 v square integrable.
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (double a : {0.4, 0.8})
        for (int N : {1, 2, 3})
        {
            std::vector<double> c(N + 1);
            for (double &v : c)
                v = U(rng);
            c[0] = 0.0;
            double ratio_prev = 0.0;
            for (double h : {1.0, 0.5, 0.25, 0.125})
            {
                auto space = std::make_shared<DgSpace>(std::make_shared<Mesh>(build_interval_mesh(0, h, 1)), N);
                DgFunction v(space);
                for (int j = 0; j <= N; ++j)
                    v.coeffs()[j] = c[j];
                const double ratio = std::sqrt(fractional_seminorm_sq(v, Axis::x, a, 0.0, nullptr)[0]) / l2_norm(v);
                if (ratio_prev > 0.0)
                    CHECK(std::log(ratio / ratio_prev) / std::log(2.0) == doctest::Approx(a).epsilon(1e-6));
                ratio_prev = ratio;
            }
        }
}

TEST_CASE("energy error of the discrete solution against itself is its jump norm")
{
    auto space = std::make_shared<DgSpace>(square(2), 1);
    const DgFunction u = l2_project(space, [](const Point &x) { return x[0] * (2 - x[0]) * x[1]; });
    const ScalarField self = [&](const Point &x) {
        const int e = PointLocator(space->mesh()).locate(x);
        return u.value(e, x);
    };
    // Representation is exact only up to the fit tolerance.
    CHECK(energy_error(u, self, 0.6, 0.6, 0.5) == doctest::Approx(std::sqrt(jump_norm_sq(u))).epsilon(1e-6));
}

TEST_CASE("stationary loop stops at once when the solution is exact")
{
    Problem p = make_problem("zero", default_params("zero"));
    p.stationary = true;
    AdaptConfig cfg;
    cfg.max_iterations = 5;
    const auto its = adapt_stationary(p, square(2), cfg, Scheme::energy);
    REQUIRE(its.size() == 1);
    CHECK(its[0].ind.total == 0.0);
}

TEST_CASE("energy adaptivity for the endpoint-singular problem")
{
    const Problem p = make_problem("ex3.1", default_params("ex3.1"));
    AdaptConfig cfg;
    cfg.max_iterations = 8;
    cfg.tol_space = 1e-12;
    StationaryOptions opts;
    opts.compute_energy_error = false;
    const auto its = adapt_stationary(p, std::make_shared<Mesh>(build_interval_mesh(0, 2, 8)), cfg, Scheme::energy, opts);
    REQUIRE(its.size() == 8);
    for (std::size_t i = 1; i < its.size(); ++i)
    {
        CHECK(its[i].mesh->num_elements() > its[i - 1].mesh->num_elements());
        CHECK(its[i].l2_error < its[i - 1].l2_error);
        CHECK(its[i].ind.total < its[i - 1].ind.total);
    }
    const Mesh &m = *its.back().mesh;
    for (int e = 0; e < m.num_elements(); ++e)
        if (m.diameter(e) <= m.h_min() * (1 + 1e-12))
        {
            const Point c = m.centroid(e);
            CHECK(std::min(c[0], 2.0 - c[0]) < 0.05);
        }
}

TEST_CASE("goal-oriented refinement follows the circular layer")
{
    const Problem p = make_problem("ex3.2", default_params("ex3.2"));
    AdaptConfig cfg;
    cfg.max_iterations = 7;
    cfg.tol_space = 1e-12;
    StationaryOptions opts;
    opts.compute_energy_error = false;
    const auto its = adapt_stationary(p, square(2), cfg, Scheme::dwr, opts);
    const Mesh &m = *its.back().mesh;
    std::vector<int> order(m.num_elements());
    for (int e = 0; e < m.num_elements(); ++e)
        order[e] = e;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return m.diameter(a) < m.diameter(b); });
    const int q = m.num_elements() / 4;
    int near = 0;
    for (int i = 0; i < q; ++i)
    {
        const Point c = m.centroid(order[i]);
        if (std::abs(std::hypot(c[0], c[1]) - 2.0) <= 0.2)
            ++near;
    }
    CHECK(near >= 0.6 * q);
}

TEST_CASE("evolution time-step control")
{
    AdaptConfig cfg;
    cfg.tol_time = 1e-3;
    cfg.tol_space = 1.0;
    SUBCASE("a steady solution never halves the step")
    {
        const Problem p = make_problem("steady", default_params("steady"));
        EvolutionAdaptor ad(p, square(4), 1, cfg, 0.05);
        for (const EvolutionRecord &r : ad.run(0.3, {}))
        {
            CHECK(r.halvings == 0);
            CHECK(r.eta_time1 <= 1e-20);
        }
        CHECK(ad.time() == doctest::Approx(0.3));
    }
    SUBCASE("a jump in the source forces halving and then growth")
    {
        Problem p = make_problem("zero", default_params("zero"));
        p.source = [](const Point &, double t) { return t < 0.05 ? 0.0 : 1.0; };
        EvolutionAdaptor ad(p, square(2), 1, cfg, 0.1);
        const EvolutionRecord r = ad.step(1.0);
        CHECK(r.halvings > 0);
        CHECK(r.eta_time1 + r.eta_time2 <= cfg.tol_time);
        CHECK(r.t <= 0.05 + 1e-12);
    }
    SUBCASE("output times are hit exactly")
    {
        const Problem p = make_problem("steady", default_params("steady"));
        EvolutionAdaptor ad(p, square(2), 1, cfg, 0.07);
        std::vector<double> seen;
        ad.run(0.2, {0.1}, [&](const EvolutionRecord &r, bool out) {
            if (out)
                seen.push_back(r.t);
        });
        REQUIRE(seen.size() == 2);
        CHECK(seen[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(seen[1] == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("invalid configuration")
    {
        AdaptConfig bad = cfg;
        bad.theta1 = 1.5;
        const Problem p = make_problem("steady", default_params("steady"));
        CHECK(kind_of([&] { EvolutionAdaptor(p, square(2), 1, bad, 0.1); }) == ErrorKind::config_error);
        CHECK(kind_of([&] { parse_scheme("greedy"); }) == ErrorKind::config_error);
    }
}
