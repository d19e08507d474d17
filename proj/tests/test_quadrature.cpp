#include "tdg/error.hpp"
#include "tdg/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace tdg;

namespace
{

double apply(const QuadRule1D &rule, auto &&f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * f(rule.nodes[i]);
    return s;
}

} // namespace

TEST_CASE("singular rule reproduces moments")
{
    SUBCASE("plain Gauss for gamma = 0")
    {
        auto r = make_singular_rule(0.0, 3);
        CHECK(apply(r.rule, [](double s) { return s * s * s; }) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("inverse square root")
    {
        auto r = make_singular_rule(-0.5, 0);
        CHECK(apply(r.rule, [](double) { return 1.0; }) == doctest::Approx(2.0).epsilon(1e-13));
    }
    SUBCASE("gamma = -0.25 with s^2")
    {
        auto r = make_singular_rule(-0.25, 2);
        CHECK(apply(r.rule, [](double s) { return s * s; }) ==
              doctest::Approx(1.0 / 2.75).epsilon(1e-13));
    }
    SUBCASE("positive weights and all moments up to the degree")
    {
        for (double g : {-0.9, -0.4, 0.3, 1.7})
            for (int deg = 0; deg <= 12; ++deg)
            {
                auto r = make_singular_rule(g, deg);
                for (double w : r.rule.weights)
                    CHECK(w > 0.0);
                for (int k = 0; k <= deg; ++k)
                {
                    const double got = apply(r.rule, [k](double s) { return std::pow(s, k); });
                    CHECK(got == doctest::Approx(1.0 / (k + g + 1.0)).epsilon(1e-12));
                }
            }
    }
    SUBCASE("non-integrable kernel")
    {
        CHECK_THROWS_AS(make_singular_rule(-1.0, 2), Error);
        try
        {
            make_singular_rule(-1.2, 2);
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::non_integrable_kernel);
        }
    }
}

TEST_CASE("Gauss–Jacobi against Legendre nodes")
{
    // Two-point Legendre nodes are +-1/sqrt(3).
    auto r = gauss_jacobi(2, 0.0, 0.0);
    CHECK(r.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("graded rule handles endpoint singularities")
{
    // int_0^1 s^{-0.4} (1-s)^{-0.3} ds = B(0.6, 0.7)
    const double exact = std::tgamma(0.6) * std::tgamma(0.7) / std::tgamma(1.3);
    GradedRuleSpec spec;
    spec.points_per_piece = 6;
    spec.levels = 3;
    spec.exp_left = -0.4;
    spec.exp_right = -0.3;
    auto rule = graded_rule01(spec);
    const double got =
        apply(rule, [](double s) { return std::pow(s, -0.4) * std::pow(1.0 - s, -0.3); });
    CHECK(got == doctest::Approx(exact).epsilon(1e-5));

    // Smooth integrands are integrated exactly to high degree.
    spec.exp_left = spec.exp_right = 0.0;
    auto plain = graded_rule01(spec);
    CHECK(apply(plain, [](double s) { return std::pow(s, 9); }) == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("triangle rule integrates monomials")
{
    // int_T r^a s^b = a! b! / (a+b+2)!
    for (int deg = 0; deg <= 10; ++deg)
    {
        auto rule = triangle_rule(deg);
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b)
            {
                double s = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q)
                    s += rule.weights[q] * std::pow(rule.points[q][0], a) *
                         std::pow(rule.points[q][1], b);
                const double exact =
                    std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
                CHECK(s == doctest::Approx(exact).epsilon(1e-13));
            }
    }
}
