#pragma once

#include <array>
#include <vector>

namespace tdg
{

/// Nodes and weights of a one-dimensional rule on a fixed interval.
struct QuadRule1D
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss–Jacobi rule for the weight (1-x)^a (1+x)^b on [-1,1] (Golub–Welsch).
QuadRule1D gauss_jacobi(int n, double a, double b);

/// Gauss–Legendre rule with n points on [0,1].
QuadRule1D gauss_legendre01(int n);

/// Rule on [0,1] for integrals of s^exponent * p(s).
struct SingularQuadRule
{
    int order = 0;
    double exponent = 0.0;
    QuadRule1D rule;
};

/// Rule exact for s^exponent * p(s), deg p <= degree. Throws non_integrable_kernel
/// when exponent <= -1.
SingularQuadRule make_singular_rule(double exponent, int degree);

/// Cached n-point variant of make_singular_rule; the returned reference stays valid
/// for the lifetime of the program.
const QuadRule1D &cached_jacobi01(double exponent, int n);
const QuadRule1D &cached_legendre01(int n);

/// Composite rule on [0,1] graded geometrically toward both end points. The
/// innermost piece at each end carries the Jacobi weight s^exp_left (resp.
/// (1-s)^exp_right) folded into the weights, so the rule applies to the raw
/// integrand. Integrands of the form s^beta * smooth are integrated with error
/// decaying like sigma^(levels*(1+beta)).
struct GradedRuleSpec
{
    int points_per_piece = 4;
    int levels = 4;
    double ratio = 0.15;
    double exp_left = 0.0;
    double exp_right = 0.0;
};

QuadRule1D graded_rule01(const GradedRuleSpec &spec);

/// Collapsed-coordinate rule on the reference triangle {r,s >= 0, r+s <= 1}
/// exact for polynomials of total degree `degree`.
struct TriangleRule
{
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

TriangleRule triangle_rule(int degree);

} // namespace tdg
