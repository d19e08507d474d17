#pragma once

#include <functional>
#include <vector>

namespace tdg
{

enum class Side
{
    left,
    right,
};

struct TemperedParams
{
    double alpha = 0.5;
    double beta = 0.5;
    double lambda = 0.0;
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    double b[2] = {0.0, 0.0};

    // Filled by riesz_constants / finalize().
    double kappa_alpha = 0.0;
    double kappa_beta = 0.0;
    double kappa = 0.0;

    void finalize();
};

struct RieszConstants
{
    double kappa_alpha;
    double kappa_beta;
    double kappa;
};

/// kappa_alpha = 1/(2cos(alpha pi/2)), likewise kappa_beta, and the reaction shift
/// kappa = 2 lambda^alpha kappa1 kappa_alpha + 2 lambda^beta kappa2 kappa_beta.
RieszConstants riesz_constants(const TemperedParams &params);
double kappa_of_order(double order);

/// Piecewise polynomial on [x0, xM]; segment m holds monomial coefficients in the
/// local variable t = (x - x_m)/(x_{m+1} - x_m) in [0,1]. Zero outside [x0, xM].
struct PiecewisePoly1D
{
    std::vector<double> breakpoints;
    std::vector<std::vector<double>> coeffs;

    std::size_t segments() const { return coeffs.size(); }
    double a() const { return breakpoints.front(); }
    double b() const { return breakpoints.back(); }
    /// Value on segment m at local parameter t.
    double segment_value(std::size_t m, double t) const;
    /// Value at x; breakpoints take the right-hand segment.
    double operator()(double x) const;

    /// Build from a function sampled on each segment (degree `degree` interpolation).
    static PiecewisePoly1D from_function(const std::vector<double> &breakpoints, int degree,
                                         const std::function<double(double)> &f);
    void validate() const;
};

double tempered_integral(const PiecewisePoly1D &u, double mu, double lambda, double x, Side side);
double tempered_rl_derivative(const PiecewisePoly1D &u, double mu, double lambda, double x,
                              Side side);
double tempered_caputo_derivative(const PiecewisePoly1D &u, double mu, double lambda, double x,
                                  Side side);

/// Kernel moments J_k = int_{r0}^{r1} r^gamma e^{-lambda r} t(r)^k dr, k = 0..kmax, where
/// t(r) = t0 + slope*r is affine. Used by every chord evaluation below.
void kernel_moments(double r0, double r1, double gamma, double lambda, double t0, double slope,
                    int kmax, double *out);

/// Fractional derivative of order mu in (0,1) of the monomials t^k (k = 0..kmax) living on
/// the chord [s0,s1] (t = (xi - s0)/(s1 - s0)) and vanishing off it, evaluated at x.
/// Includes the jump kernels at both chord ends. x must not coincide with s0 or s1.
void chord_rl_derivative(double s0, double s1, double x, double mu, double lambda, Side side,
                         int kmax, double *out);

/// Same for the tempered integral of order mu > 0.
void chord_integral(double s0, double s1, double x, double mu, double lambda, Side side, int kmax,
                    double *out);

/// A smooth function on [a,b] given with the derivatives the evaluators need.
struct SmoothFn
{
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f; // only for orders in (1,2)
};

/// Tempered RL derivative of order mu in (0,1) or (1,2) of a smooth function that vanishes
/// outside [a,b], computed by adaptive quadrature of the Caputo form plus the boundary
/// terms. Independent of the piecewise-polynomial machinery.
double smooth_rl_derivative(const SmoothFn &g, double a, double b, double mu, double lambda,
                            double x, Side side);
double smooth_integral(const std::function<double(double)> &g, double a, double b, double mu,
                       double lambda, double x, Side side);

} // namespace tdg
