#pragma once

// Seeded property checks of the tempered calculus and the assembled forms, shared by the
// `validate` command and the acceptance binary.

#include "support/oracles.hpp"

#include "tdg/assembly.hpp"
#include "tdg/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace suite
{

struct Check
{
    std::string name;
    double value; // worst observed deviation (or fitted quantity)
    double tol;
    bool pass;
};

namespace detail
{

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline std::vector<double> random_coeffs(std::mt19937_64 &rng, int n)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> c(n);
    for (double &v : c)
        v = U(rng);
    return c;
}

inline tdg::PiecewisePoly1D random_poly(std::mt19937_64 &rng, std::vector<double> bp, int degree)
{
    tdg::PiecewisePoly1D u;
    u.breakpoints = std::move(bp);
    for (std::size_t m = 0; m + 1 < u.breakpoints.size(); ++m)
        u.coeffs.push_back(random_coeffs(rng, degree + 1));
    return u;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y)
{
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace detail

/// (I_L v, w) = (v, I_R w) for random piecewise polynomials.
inline Check adjointness(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const double a = 0.0, b = 1.5, lambda = 1.2;
    double worst = 0.0;
    for (double mu : {0.35, 0.8, 1.3})
    {
        const tdg::PiecewisePoly1D v = detail::random_poly(rng, {a, 0.6, b}, 2);
        const tdg::PiecewisePoly1D w = detail::random_poly(rng, {a, b}, 3);
        auto lhs_f = [&](double x) { return tempered_integral(v, mu, lambda, x, tdg::Side::left) * w(x); };
        auto rhs_f = [&](double x) { return v(x) * tempered_integral(w, mu, lambda, x, tdg::Side::right); };
        const double lhs = oracle::integrate(lhs_f, a, 0.6) + oracle::integrate(lhs_f, 0.6, b);
        const double rhs = oracle::integrate(rhs_f, a, 0.6) + oracle::integrate(rhs_f, 0.6, b);
        worst = std::max(worst, detail::rel(lhs, rhs));
    }
    return {"adjointness", worst, 1e-9, worst <= 1e-9};
}

/// I^mu I^nu u = I^{mu+nu} u.
inline Check semigroup(std::uint64_t seed)
{
    std::mt19937_64 rng(seed + 1);
    const double a = 0.0, b = 1.5, lambda = 1.2;
    tdg::PiecewisePoly1D u = detail::random_poly(rng, {a, b}, 3);
    u.coeffs[0][0] = 0.0;
    double worst = 0.0;
    for (auto [mu, nu] : {std::pair{0.3, 0.5}, std::pair{0.7, 0.9}})
        for (double x : {0.4, 1.1, 1.5})
        {
            auto inner = [&](double s) { return tempered_integral(u, nu, lambda, s, tdg::Side::left); };
            const double lhs = oracle::left_integral_gk(inner, a, mu, lambda, x);
            const double rhs = tempered_integral(u, mu + nu, lambda, x, tdg::Side::left);
            worst = std::max(worst, detail::rel(lhs, rhs));
        }
    return {"semigroup", worst, 1e-9, worst <= 1e-9};
}

/// Riemann–Liouville and Caputo forms agree for functions vanishing with their derivative
/// at both ends.
inline Check rl_equals_caputo(std::uint64_t seed)
{
    std::mt19937_64 rng(seed + 2);
    double worst = 0.0;
    for (double mu : {0.3, 0.5, 0.8})
        for (double lambda : {0.0, 1.5})
        {
            const tdg::PiecewisePoly1D f = oracle::condition_a_poly(0.0, 2.0, detail::random_coeffs(rng, 3), 2);
            for (double x : {0.3, 0.7, 1.7})
                for (tdg::Side side : {tdg::Side::left, tdg::Side::right})
                    worst = std::max(worst, std::abs(tempered_rl_derivative(f, mu, lambda, x, side) -
                                                     tempered_caputo_derivative(f, mu, lambda, x, side)));
        }
    return {"rl_equals_caputo", worst, 1e-8, worst <= 1e-8};
}

/// lambda = 0 against incomplete-beta closed forms of the plain RL integral.
inline Check lambda_zero(std::uint64_t seed)
{
    std::mt19937_64 rng(seed + 3);
    const std::vector<double> bp{0.0, 0.3, 0.55, 1.0};
    const std::vector<double> c = detail::random_coeffs(rng, 3);
    tdg::PiecewisePoly1D u;
    u.breakpoints = bp;
    for (std::size_t m = 0; m < c.size(); ++m)
    {
        const double x0 = bp[m], len = bp[m + 1] - bp[m];
        u.coeffs.push_back({c[m] * x0 * x0, c[m] * 2 * x0 * len, c[m] * len * len});
    }
    double worst = 0.0;
    for (double mu : {0.3, 0.75, 1.4})
        for (double x : {0.2, 0.5, 0.9, 1.0})
        {
            const double ref = oracle::rl_integral_power(bp, c, 2, mu, x);
            worst = std::max(worst, std::abs(tempered_integral(u, mu, 0.0, x, tdg::Side::left) - ref) /
                                        std::max(1.0, std::abs(ref)));
        }
    return {"lambda_zero_reduction", worst, 1e-12, worst <= 1e-12};
}

/// (D_L u, D_R u) >= cos(pi alpha/2) ||D_L u||^2 at order alpha/2; reports the smallest ratio
/// over the bound.
inline Check coercivity(std::uint64_t seed)
{
    std::mt19937_64 rng(seed + 4);
    double worst = 1e300;
    for (double alpha : {0.2, 0.5, 0.8})
        for (double lambda : {0.0, 2.0})
            for (int trial = 0; trial < 3; ++trial)
            {
                const tdg::PiecewisePoly1D f = oracle::condition_a_poly(0.0, 2.0, detail::random_coeffs(rng, 3));
                const double mu = alpha / 2.0;
                auto cross = [&](double x) {
                    return tempered_rl_derivative(f, mu, lambda, x, tdg::Side::left) *
                           tempered_rl_derivative(f, mu, lambda, x, tdg::Side::right);
                };
                auto sq = [&](double x) {
                    const double d = tempered_rl_derivative(f, mu, lambda, x, tdg::Side::left);
                    return d * d;
                };
                const double bound = std::cos(std::numbers::pi * alpha / 2.0) * oracle::integrate(sq, 0.0, 2.0);
                worst = std::min(worst, oracle::integrate(cross, 0.0, 2.0) / bound);
            }
    return {"coercivity_ratio", worst, 1.0 - 1e-6, worst >= 1.0 - 1e-6};
}

/// Convection quadratic form equals half the weighted jump norm, 100 random vectors.
inline Check upwind_identity(std::uint64_t seed)
{
    std::mt19937_64 rng(seed + 5);
    auto space = std::make_shared<tdg::DgSpace>(
        std::make_shared<tdg::Mesh>(tdg::build_structured_tri_mesh(0, 2, 0, 2, 3, 3)), 2);
    const double b[2] = {0.5, 0.5};
    const tdg::SpMat S = tdg::assemble_convection(*space, b);
    const tdg::Mesh &m = space->mesh();
    std::normal_distribution<double> N01;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        Eigen::VectorXd c(space->ndofs());
        for (int i = 0; i < c.size(); ++i)
            c[i] = N01(rng);
        const tdg::DgFunction v(space, c);
        double rhs = 0.0;
        for (int f = 0; f < int(m.faces().size()); ++f)
        {
            const tdg::Face &face = m.faces()[f];
            const double bn = std::abs(b[0] * face.normal[0] + b[1] * face.normal[1]);
            const auto fq = space->face_quad(f);
            for (std::size_t k = 0; k < fq.points.size(); ++k)
            {
                const double j = tdg::trace_jump_average(v, f, fq.points[k]).first;
                rhs += 0.5 * bn * fq.weights[k] * j * j;
            }
        }
        worst = std::max(worst, std::abs(c.dot(S * c) - rhs));
    }
    return {"upwind_identity", worst, 1e-10, worst <= 1e-10};
}

/// Fitted exponent of |v|_{H^a(0,h)}/||v|| against h for random polynomials with v(0) = 0;
/// reports the largest deviation from -a over a in {0.4, 0.8}.
inline Check inverse_inequality(std::uint64_t seed, std::vector<double> *slopes = nullptr)
{
    std::mt19937_64 rng(seed + 6);
    double worst = 0.0;
    for (double a : {0.4, 0.8})
    {
        std::vector<double> hs, ratios;
        for (int trial = 0; trial < 3; ++trial)
        {
            const int N = 1 + trial;
            std::vector<double> c = detail::random_coeffs(rng, N + 1);
            c[0] = 0.0;
            std::vector<double> h_list, r_list;
            for (double h : {1.0, 0.5, 0.25, 0.125})
            {
                auto space = std::make_shared<tdg::DgSpace>(
                    std::make_shared<tdg::Mesh>(tdg::build_interval_mesh(0, h, 1)), N);
                tdg::DgFunction v(space);
                for (int j = 0; j <= N; ++j)
                    v.coeffs()[j] = c[j];
                const double semi = tdg::fractional_seminorm_sq(v, tdg::Axis::x, a, 0.0, nullptr)[0];
                h_list.push_back(h);
                r_list.push_back(std::sqrt(semi) / tdg::l2_norm(v));
            }
            const double s = detail::loglog_slope(h_list, r_list);
            if (slopes)
                slopes->push_back(s);
            worst = std::max(worst, std::abs(s + a));
        }
    }
    return {"inverse_inequality_exponent", worst, 0.05, worst <= 0.05};
}

/// Calculus properties only (the tempered_calc suite).
inline std::vector<Check> calculus_suite(std::uint64_t seed)
{
    return {adjointness(seed), semigroup(seed), rl_equals_caputo(seed), lambda_zero(seed), coercivity(seed)};
}

} // namespace suite
