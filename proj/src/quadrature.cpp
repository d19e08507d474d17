#include "tdg/quadrature.hpp"

#include "tdg/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace tdg
{

const char *to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::invalid_order: return "invalid-order";
    case ErrorKind::out_of_domain: return "out-of-domain";
    case ErrorKind::singular_point: return "singular-point";
    case ErrorKind::non_integrable_kernel: return "non-integrable-kernel";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::degenerate_ray: return "degenerate-ray";
    case ErrorKind::input_error: return "input-error";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::internal_error: return "internal-error";
    case ErrorKind::config_error: return "config-error";
    case ErrorKind::undefined_index: return "undefined-index";
    case ErrorKind::adapt_abort: return "adapt-abort";
    }
    return "unknown";
}

QuadRule1D gauss_jacobi(int n, double a, double b)
{
    require(n >= 1, ErrorKind::invalid_input, "quadrature needs at least one point");
    require(a > -1.0 && b > -1.0, ErrorKind::non_integrable_kernel,
            "Jacobi exponents must exceed -1");

    // Monic three-term recurrence of the Jacobi polynomials.
    Eigen::VectorXd diag(n);
    Eigen::VectorXd offdiag(n > 1 ? n - 1 : 1);
    const double ab = a + b;
    diag(0) = (b - a) / (ab + 2.0);
    for (int k = 1; k < n; ++k)
    {
        const double two_k_ab = 2.0 * k + ab;
        diag(k) = (b * b - a * a) / (two_k_ab * (two_k_ab + 2.0));
        const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        const double den = two_k_ab * two_k_ab * (two_k_ab + 1.0) * (two_k_ab - 1.0);
        offdiag(k - 1) = std::sqrt(num / den);
    }

    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));

    QuadRule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1)
    {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    require(eig.info() == Eigen::Success, ErrorKind::internal_error,
            "Golub-Welsch eigensolve failed");
    for (int i = 0; i < n; ++i)
    {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

QuadRule1D gauss_legendre01(int n)
{
    QuadRule1D rule = gauss_jacobi(n, 0.0, 0.0);
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
        rule.weights[i] *= 0.5;
    }
    return rule;
}

namespace
{

// s^exponent on [0,1] is (1+x)^exponent on [-1,1] up to the factor 2^-exponent.
QuadRule1D jacobi01(double exponent, int n)
{
    QuadRule1D rule = gauss_jacobi(n, 0.0, exponent);
    const double scale = std::pow(2.0, -exponent - 1.0);
    for (std::size_t i = 0; i < rule.size(); ++i)
    {
        rule.nodes[i] = 0.5 * (rule.nodes[i] + 1.0);
        rule.weights[i] *= scale;
    }
    return rule;
}

struct RuleCache
{
    std::mutex mutex;
    std::map<std::pair<double, int>, std::unique_ptr<QuadRule1D>> rules;
};

RuleCache &rule_cache()
{
    static RuleCache cache;
    return cache;
}

} // namespace

SingularQuadRule make_singular_rule(double exponent, int degree)
{
    require(exponent > -1.0, ErrorKind::non_integrable_kernel,
            "kernel exponent must exceed -1");
    require(degree >= 0, ErrorKind::invalid_input, "degree must be nonnegative");
    SingularQuadRule out;
    out.order = degree / 2 + 1;
    out.exponent = exponent;
    out.rule = jacobi01(exponent, out.order);
    return out;
}

const QuadRule1D &cached_jacobi01(double exponent, int n)
{
    require(exponent > -1.0, ErrorKind::non_integrable_kernel,
            "kernel exponent must exceed -1");
    RuleCache &cache = rule_cache();
    std::lock_guard<std::mutex> lock(cache.mutex);
    auto &slot = cache.rules[{exponent, n}];
    if (!slot)
        slot = std::make_unique<QuadRule1D>(jacobi01(exponent, n));
    return *slot;
}

const QuadRule1D &cached_legendre01(int n) { return cached_jacobi01(0.0, n); }

QuadRule1D graded_rule01(const GradedRuleSpec &spec)
{
    require(spec.levels >= 0 && spec.points_per_piece >= 1 && spec.ratio > 0.0 &&
                spec.ratio < 1.0,
            ErrorKind::invalid_input, "bad graded rule parameters");

    const QuadRule1D &gauss = cached_legendre01(spec.points_per_piece);
    QuadRule1D out;

    auto add_piece = [&](double lo, double hi) {
        const double len = hi - lo;
        for (std::size_t i = 0; i < gauss.size(); ++i)
        {
            out.nodes.push_back(lo + len * gauss.nodes[i]);
            out.weights.push_back(len * gauss.weights[i]);
        }
    };
    // Innermost piece [0, delta] adjacent to an end point, with the weight
    // t^exp folded into the plain weights.
    auto add_singular_piece = [&](double delta, double exponent, bool at_left) {
        if (exponent == 0.0)
        {
            if (at_left)
                add_piece(0.0, delta);
            else
                add_piece(1.0 - delta, 1.0);
            return;
        }
        const QuadRule1D &jac = cached_jacobi01(exponent, spec.points_per_piece);
        for (std::size_t i = 0; i < jac.size(); ++i)
        {
            const double t = jac.nodes[i];
            const double w = delta * jac.weights[i] / std::pow(t, exponent);
            out.nodes.push_back(at_left ? delta * t : 1.0 - delta * t);
            out.weights.push_back(w);
        }
    };

    const double half = 0.5;
    std::vector<double> marks; // geometric marks in (0, half]
    for (int l = spec.levels; l >= 0; --l)
        marks.push_back(half * std::pow(spec.ratio, l));

    if (spec.levels == 0)
    {
        add_singular_piece(half, spec.exp_left, true);
        add_singular_piece(half, spec.exp_right, false);
    }
    else
    {
        add_singular_piece(marks.front(), spec.exp_left, true);
        for (std::size_t i = 0; i + 1 < marks.size(); ++i)
            add_piece(marks[i], marks[i + 1]);
        for (std::size_t i = marks.size() - 1; i > 0; --i)
            add_piece(1.0 - marks[i], 1.0 - marks[i - 1]);
        add_singular_piece(marks.front(), spec.exp_right, false);
    }
    return out;
}

TriangleRule triangle_rule(int degree)
{
    require(degree >= 0, ErrorKind::invalid_input, "degree must be nonnegative");
    const int n = degree / 2 + 1;
    const QuadRule1D &gu = cached_legendre01(n);
    // Weight (1-v) from the collapse: Jacobi exponent on the (1-v) side.
    QuadRule1D gv = gauss_jacobi(n, 1.0, 0.0);
    for (std::size_t j = 0; j < gv.size(); ++j)
    {
        gv.nodes[j] = 0.5 * (gv.nodes[j] + 1.0);
        gv.weights[j] *= 0.25;
    }
    TriangleRule rule;
    for (std::size_t j = 0; j < gv.size(); ++j)
        for (std::size_t i = 0; i < gu.size(); ++i)
        {
            const double v = gv.nodes[j];
            rule.points.push_back({gu.nodes[i] * (1.0 - v), v});
            rule.weights.push_back(gu.weights[i] * gv.weights[j]);
        }
    return rule;
}

} // namespace tdg
