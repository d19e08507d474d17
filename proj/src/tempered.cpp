#include "tdg/tempered.hpp"

#include "tdg/error.hpp"
#include "tdg/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace tdg
{

double kappa_of_order(double order)
{
    require(order > 0.0 && order < 2.0 && order != 1.0, ErrorKind::invalid_order,
            "Riesz order must lie in (0,2) without 1");
    return 1.0 / (2.0 * std::cos(order * std::numbers::pi / 2.0));
}

RieszConstants riesz_constants(const TemperedParams &params)
{
    require(params.lambda >= 0.0, ErrorKind::invalid_input, "lambda must be nonnegative");
    RieszConstants c;
    c.kappa_alpha = kappa_of_order(params.alpha);
    c.kappa_beta = kappa_of_order(params.beta);
    c.kappa = 2.0 * std::pow(params.lambda, params.alpha) * params.kappa1 * c.kappa_alpha +
              2.0 * std::pow(params.lambda, params.beta) * params.kappa2 * c.kappa_beta;
    return c;
}

void TemperedParams::finalize()
{
    const RieszConstants c = riesz_constants(*this);
    kappa_alpha = c.kappa_alpha;
    kappa_beta = c.kappa_beta;
    kappa = c.kappa;
}

// ---------------------------------------------------------------------------
// Piecewise polynomials

double PiecewisePoly1D::segment_value(std::size_t m, double t) const
{
    const auto &c = coeffs[m];
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;)
        v = v * t + c[k];
    return v;
}

double PiecewisePoly1D::operator()(double x) const
{
    if (x < a() || x > b())
        return 0.0;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    std::size_t m = it == breakpoints.begin() ? 0 : std::size_t(it - breakpoints.begin()) - 1;
    m = std::min(m, segments() - 1);
    const double len = breakpoints[m + 1] - breakpoints[m];
    return segment_value(m, (x - breakpoints[m]) / len);
}

void PiecewisePoly1D::validate() const
{
    require(breakpoints.size() >= 2 && coeffs.size() + 1 == breakpoints.size(),
            ErrorKind::invalid_input, "piecewise polynomial needs matching segments");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        require(breakpoints[i] < breakpoints[i + 1], ErrorKind::invalid_input,
                "breakpoints must increase strictly");
}

PiecewisePoly1D PiecewisePoly1D::from_function(const std::vector<double> &breakpoints, int degree,
                                               const std::function<double(double)> &f)
{
    PiecewisePoly1D p;
    p.breakpoints = breakpoints;
    const int n = degree + 1;
    // Interpolate at Chebyshev points of each segment; solve the small Vandermonde system.
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = n == 1 ? 0.5 : 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / n);
    for (std::size_t m = 0; m + 1 < breakpoints.size(); ++m)
    {
        const double x0 = breakpoints[m], len = breakpoints[m + 1] - x0;
        std::vector<double> A(n * n), rhs(n);
        for (int i = 0; i < n; ++i)
        {
            double tk = 1.0;
            for (int k = 0; k < n; ++k, tk *= t[i])
                A[i * n + k] = tk;
            rhs[i] = f(x0 + len * t[i]);
        }
        // Gaussian elimination with partial pivoting; n <= 8 here.
        for (int c = 0; c < n; ++c)
        {
            int piv = c;
            for (int r = c + 1; r < n; ++r)
                if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c]))
                    piv = r;
            for (int k = 0; k < n; ++k)
                std::swap(A[c * n + k], A[piv * n + k]);
            std::swap(rhs[c], rhs[piv]);
            for (int r = c + 1; r < n; ++r)
            {
                const double fac = A[r * n + c] / A[c * n + c];
                for (int k = c; k < n; ++k)
                    A[r * n + k] -= fac * A[c * n + k];
                rhs[r] -= fac * rhs[c];
            }
        }
        std::vector<double> c(n);
        for (int r = n - 1; r >= 0; --r)
        {
            double s = rhs[r];
            for (int k = r + 1; k < n; ++k)
                s -= A[r * n + k] * c[k];
            c[r] = s / A[r * n + r];
        }
        p.coeffs.push_back(std::move(c));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Kernel moments

namespace
{

constexpr int max_rule_points = 48;

// Hot path: avoid the locked global cache by keeping a per-thread table of rules per
// exponent.
const QuadRule1D &jacobi_rule(double gamma, int n)
{
    struct Entry
    {
        double gamma;
        std::array<const QuadRule1D *, max_rule_points + 1> rules{};
    };
    thread_local std::vector<Entry> table;
    n = std::clamp(n, 1, max_rule_points);
    Entry *entry = nullptr;
    for (auto &e : table)
        if (e.gamma == gamma)
        {
            entry = &e;
            break;
        }
    if (!entry)
    {
        table.push_back(Entry{gamma, {}});
        entry = &table.back();
    }
    if (!entry->rules[n])
        entry->rules[n] = &cached_jacobi01(gamma, n);
    return *entry->rules[n];
}

int points_for(int kmax, double lambda_len)
{
    return kmax / 2 + 7 + int(std::ceil(lambda_len));
}

// int_0^{R} r^gamma e^{-lambda r} (t0 + slope r)^k dr, accumulated into out[0..kmax].
void jacobi_moments(double R, double gamma, double lambda, double t0, double slope, int kmax,
                    double sign, double *out)
{
    if (R <= 0.0)
        return;
    const QuadRule1D &rule = jacobi_rule(gamma, points_for(kmax, lambda * R));
    const double scale = sign * std::pow(R, gamma + 1.0);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
        const double r = R * rule.nodes[q];
        const double t = t0 + slope * r;
        double w = scale * rule.weights[q] * std::exp(-lambda * r);
        for (int k = 0; k <= kmax; ++k, w *= t)
            out[k] += w;
    }
}

} // namespace

void kernel_moments(double r0, double r1, double gamma, double lambda, double t0, double slope,
                    int kmax, double *out)
{
    std::fill(out, out + kmax + 1, 0.0);
    if (r1 <= r0)
        return;
    if (r0 <= 0.0)
    {
        jacobi_moments(r1, gamma, lambda, t0, slope, kmax, 1.0, out);
        return;
    }
    const double len = r1 - r0;
    if (r0 >= len)
    {
        // Kernel is smooth on [r0,r1]; plain Gauss–Legendre.
        // Point count from the Bernstein ellipse of the singularity at r = 0.
        const double a = 1.0 + 2.0 * r0 / len;
        const double rho = a + std::sqrt(a * a - 1.0);
        const int n = kmax / 2 + int(std::ceil(5.5 / std::log10(rho))) + int(std::ceil(lambda * len));
        const QuadRule1D &rule = jacobi_rule(0.0, n);
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            const double r = r0 + len * rule.nodes[q];
            const double t = t0 + slope * r;
            double w = len * rule.weights[q] * std::exp(gamma * std::log(r) - lambda * r);
            for (int k = 0; k <= kmax; ++k, w *= t)
                out[k] += w;
        }
        return;
    }
    jacobi_moments(r1, gamma, lambda, t0, slope, kmax, 1.0, out);
    jacobi_moments(r0, gamma, lambda, t0, slope, kmax, -1.0, out);
}

void chord_integral(double s0, double s1, double x, double mu, double lambda, Side side, int kmax,
                    double *out)
{
    const double len = s1 - s0;
    const double inv_gamma = 1.0 / std::tgamma(mu);
    double r0, r1, slope;
    if (side == Side::left)
    {
        r0 = std::max(x - s1, 0.0);
        r1 = x - s0;
        slope = -1.0 / len;
    }
    else
    {
        r0 = std::max(s0 - x, 0.0);
        r1 = s1 - x;
        slope = 1.0 / len;
    }
    if (r1 <= 0.0)
    {
        std::fill(out, out + kmax + 1, 0.0);
        return;
    }
    kernel_moments(r0, r1, mu - 1.0, lambda, (x - s0) / len, slope, kmax, out);
    for (int k = 0; k <= kmax; ++k)
        out[k] *= inv_gamma;
}

namespace
{

void chord_derivative_impl(double s0, double s1, double x, double mu, double lambda, Side side,
                           int kmax, bool jumps, double *out)
{
    const double len = s1 - s0;
    const double inv_gamma = 1.0 / std::tgamma(1.0 - mu);
    auto kernel = [&](double r) { return std::pow(r, -mu) * std::exp(-lambda * r); };

    std::array<double, 16> J{};
    double r0, r1, slope;
    if (side == Side::left)
    {
        r0 = std::max(x - s1, 0.0);
        r1 = x - s0;
        slope = -1.0 / len;
    }
    else
    {
        r0 = std::max(s0 - x, 0.0);
        r1 = s1 - x;
        slope = 1.0 / len;
    }
    if (r1 <= 0.0)
    {
        std::fill(out, out + kmax + 1, 0.0);
        return;
    }
    kernel_moments(r0, r1, -mu, lambda, (x - s0) / len, slope, kmax, J.data());

    // (lambda +/- D) applied inside the chord; d/dxi t^k = (k/len) t^{k-1}.
    const double dsign = side == Side::left ? 1.0 : -1.0;
    for (int k = 0; k <= kmax; ++k)
    {
        double v = lambda * J[k];
        if (k > 0)
            v += dsign * (k / len) * J[k - 1];
        out[k] = v * inv_gamma;
    }
    if (!jumps)
        return;

    if (side == Side::left)
    {
        // Jump 0 -> t^k(s0) = delta_k0 at s0, t^k(s1) = 1 -> 0 at s1.
        out[0] += kernel(r1) * inv_gamma;
        if (x > s1)
        {
            const double kv = kernel(r0) * inv_gamma;
            for (int k = 0; k <= kmax; ++k)
                out[k] -= kv;
        }
    }
    else
    {
        const double kv = kernel(r1) * inv_gamma;
        for (int k = 0; k <= kmax; ++k)
            out[k] += kv;
        if (x < s0)
            out[0] -= kernel(r0) * inv_gamma;
    }
}

void check_derivative_order(double mu)
{
    require(mu > 0.0 && mu < 1.0, ErrorKind::invalid_order,
            "derivative order must lie in (0,1)");
}

void check_point(const PiecewisePoly1D &u, double x, bool derivative)
{
    u.validate();
    require(x >= u.a() && x <= u.b(), ErrorKind::out_of_domain, "evaluation point outside [a,b]");
    if (derivative)
        for (double bp : u.breakpoints)
            require(x != bp, ErrorKind::singular_point,
                    "derivative requested at a breakpoint");
}

} // namespace

void chord_rl_derivative(double s0, double s1, double x, double mu, double lambda, Side side,
                         int kmax, double *out)
{
    chord_derivative_impl(s0, s1, x, mu, lambda, side, kmax, true, out);
}

namespace
{

template <class ChordFn>
double sum_over_segments(const PiecewisePoly1D &u, ChordFn &&chord)
{
    std::array<double, 16> buf{};
    double total = 0.0;
    for (std::size_t m = 0; m < u.segments(); ++m)
    {
        const auto &c = u.coeffs[m];
        if (c.empty())
            continue;
        const int kmax = int(c.size()) - 1;
        require(kmax < 16, ErrorKind::invalid_input, "polynomial degree too high");
        chord(u.breakpoints[m], u.breakpoints[m + 1], kmax, buf.data());
        for (int k = 0; k <= kmax; ++k)
            total += c[k] * buf[k];
    }
    return total;
}

} // namespace

double tempered_integral(const PiecewisePoly1D &u, double mu, double lambda, double x, Side side)
{
    require(mu > 0.0, ErrorKind::invalid_order, "integral order must be positive");
    check_point(u, x, false);
    return sum_over_segments(u, [&](double s0, double s1, int kmax, double *out) {
        chord_integral(s0, s1, x, mu, lambda, side, kmax, out);
    });
}

double tempered_rl_derivative(const PiecewisePoly1D &u, double mu, double lambda, double x,
                              Side side)
{
    check_derivative_order(mu);
    check_point(u, x, true);
    return sum_over_segments(u, [&](double s0, double s1, int kmax, double *out) {
        chord_derivative_impl(s0, s1, x, mu, lambda, side, kmax, true, out);
    });
}

double tempered_caputo_derivative(const PiecewisePoly1D &u, double mu, double lambda, double x,
                                  Side side)
{
    check_derivative_order(mu);
    check_point(u, x, true);
    return sum_over_segments(u, [&](double s0, double s1, int kmax, double *out) {
        chord_derivative_impl(s0, s1, x, mu, lambda, side, kmax, false, out);
    });
}

// ---------------------------------------------------------------------------
// Smooth functions

namespace
{

// int over the part of [a,b] on the chosen side of x of
// |x - xi|^{nu-1} e^{-lambda |x - xi|} h(xi) dxi, with r = R s^{1/nu} removing the kernel
// singularity at xi = x.
double weakly_singular(const std::function<double(double)> &h, double a, double b, double nu,
                       double lambda, double x, Side side)
{
    const double R = side == Side::left ? x - a : b - x;
    if (R <= 0.0)
        return 0.0;
    const double q = 1.0 / nu;
    const double dir = side == Side::left ? -1.0 : 1.0;
    auto integrand = [&](double s) {
        const double r = R * std::pow(s, q);
        return std::exp(-lambda * r) * h(x + dir * r);
    };
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    double err = 0.0;
    const double val = integrator.integrate(integrand, 0.0, 1.0, 1e-12, &err);
    return std::pow(R, nu) * q * val;
}

} // namespace

double smooth_integral(const std::function<double(double)> &g, double a, double b, double mu,
                       double lambda, double x, Side side)
{
    require(mu > 0.0, ErrorKind::invalid_order, "integral order must be positive");
    require(x >= a && x <= b, ErrorKind::out_of_domain, "evaluation point outside [a,b]");
    return weakly_singular(g, a, b, mu, lambda, x, side) / std::tgamma(mu);
}

double smooth_rl_derivative(const SmoothFn &g, double a, double b, double mu, double lambda,
                            double x, Side side)
{
    require(mu > 0.0 && mu < 2.0 && mu != 1.0, ErrorKind::invalid_order,
            "derivative order must lie in (0,1) or (1,2)");
    require(x > a && x < b, ErrorKind::out_of_domain, "evaluation point must be interior");
    // Right-sided operators are the left ones after xi -> -xi, which flips odd derivatives.
    const double s = side == Side::left ? 1.0 : -1.0;
    const double end = side == Side::left ? a : b;
    const double dist = side == Side::left ? x - a : b - x;
    const double damp = std::exp(-lambda * dist);
    if (mu < 1.0)
    {
        auto h = [&](double xi) { return lambda * g.f(xi) + s * g.df(xi); };
        const double bulk = weakly_singular(h, a, b, 1.0 - mu, lambda, x, side);
        return (g.f(end) * std::pow(dist, -mu) * damp + bulk) / std::tgamma(1.0 - mu);
    }
    require(static_cast<bool>(g.d2f), ErrorKind::invalid_input,
            "orders in (1,2) need the second derivative");
    auto h = [&](double xi) {
        return lambda * lambda * g.f(xi) + 2.0 * lambda * s * g.df(xi) + g.d2f(xi);
    };
    const double bulk = weakly_singular(h, a, b, 2.0 - mu, lambda, x, side);
    const double b0 = g.f(end) * std::pow(dist, -mu) * damp / std::tgamma(1.0 - mu);
    const double b1 =
        (lambda * g.f(end) + s * g.df(end)) * std::pow(dist, 1.0 - mu) * damp / std::tgamma(2.0 - mu);
    return b0 + b1 + bulk / std::tgamma(2.0 - mu);
}

} // namespace tdg
