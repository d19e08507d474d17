#pragma once

// Reference computations shared by the unit tests and the acceptance binary. These use
// Gauss–Kronrod adaptive quadrature and closed forms only, never the library evaluators.

#include "tdg/tempered.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle
{

inline double integrate(const std::function<double(double)> &f, double a, double b,
                        double tol = 1e-11)
{
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
}

/// Untempered left RL integral at x of u(xi) = c_m xi^k on [x_m, x_{m+1}] (zero elsewhere),
/// through incomplete beta functions. Requires breakpoints >= 0.
inline double rl_integral_power(const std::vector<double> &bp, const std::vector<double> &c, int k,
                                double mu, double x)
{
    double total = 0.0;
    for (std::size_t m = 0; m + 1 < bp.size(); ++m)
    {
        const double lo = bp[m], hi = std::min(bp[m + 1], x);
        if (hi <= lo)
            continue;
        // xi = x w: int (x-xi)^{mu-1} xi^k = x^{mu+k} int_{lo/x}^{hi/x} (1-w)^{mu-1} w^k dw
        const double B = boost::math::beta(k + 1.0, mu);
        const double piece = boost::math::ibeta(k + 1.0, mu, hi / x) -
                             boost::math::ibeta(k + 1.0, mu, lo / x);
        total += c[m] * std::pow(x, mu + k) * B * piece;
    }
    return total / std::tgamma(mu);
}

/// Power rule for D^mu of xi^p on [0, ...): Gamma(p+1)/Gamma(p+1-mu) x^{p-mu}.
inline double rl_power_rule(double p, double mu, double x)
{
    return std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - mu) * std::pow(x, p - mu);
}

/// Tempered left operator of a smooth g on [a,b] (order mu in (0,1)) in Caputo form with the
/// kernel singularity split off onto a small interval treated by substitution r = s^{1/(1-mu)}.
inline double left_derivative_gk(const tdg::SmoothFn &g, double a, double mu, double lambda,
                                 double x)
{
    const double nu = 1.0 - mu;
    const double R = x - a;
    auto h = [&](double s) {
        const double r = R * std::pow(s, 1.0 / nu);
        const double xi = x - r;
        return std::exp(-lambda * r) * (lambda * g.f(xi) + g.df(xi));
    };
    const double bulk = std::pow(R, nu) / nu * integrate(h, 0.0, 1.0);
    return (g.f(a) * std::pow(R, -mu) * std::exp(-lambda * R) + bulk) / std::tgamma(nu);
}

/// Condition-A test family: (x-a)^2 (b-x)^2 (c0 + c1 x + c2 x^2).
inline tdg::PiecewisePoly1D condition_a_poly(double a, double b, std::vector<double> c,
                                             int segments = 1)
{
    std::vector<double> bp(segments + 1);
    for (int i = 0; i <= segments; ++i)
        bp[i] = a + (b - a) * i / segments;
    auto f = [=](double x) {
        double p = 0.0;
        for (std::size_t k = c.size(); k-- > 0;)
            p = p * x + c[k];
        return (x - a) * (x - a) * (b - x) * (b - x) * p;
    };
    return tdg::PiecewisePoly1D::from_function(bp, 4 + int(c.size()) - 1, f);
}

} // namespace oracle

namespace oracle
{

/// Left tempered integral of order mu of an arbitrary function g on [a, x], by substitution
/// r = R s^{1/mu} and Gauss–Kronrod.
inline double left_integral_gk(const std::function<double(double)> &g, double a, double mu,
                               double lambda, double x)
{
    const double R = x - a;
    if (R <= 0.0)
        return 0.0;
    auto h = [&](double s) {
        const double r = R * std::pow(s, 1.0 / mu);
        return std::exp(-lambda * r) * g(x - r);
    };
    return std::pow(R, mu) / mu * integrate(h, 0.0, 1.0) / std::tgamma(mu);
}

} // namespace oracle
