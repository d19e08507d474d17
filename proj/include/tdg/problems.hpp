#pragma once

#include "tdg/assembly.hpp"
#include "tdg/tempered.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tdg
{

using SpaceTimeField = std::function<double(const Point &, double)>;

struct ExactSolution
{
    SpaceTimeField u;
    SpaceTimeField u_t;
    std::function<Point(const Point &, double)> grad;
    /// Restriction to the line through p along an axis at time t.
    std::function<SmoothFn(Axis, const Point &, double)> slice;
    /// Optional product form u = X_t(x) Y_t(y); factor(axis, t) is the 1D factor.
    std::function<SmoothFn(Axis, double)> factor;
    /// Optional time split u(x,t) = T(t) u(x,0)/T(0).
    std::function<double(double)> time_factor;
    std::function<double(double)> time_factor_dt;
};

struct Problem
{
    std::string name;
    int dim = 2;
    std::array<double, 4> domain{0.0, 2.0, 0.0, 2.0};
    TemperedParams params;
    OperatorModel model;
    bool stationary = false;
    double final_time = 1.0;
    std::optional<ExactSolution> exact;
    SpaceTimeField source;
    std::function<double(const Point &)> initial;
};

/// Known problem identifiers: poly1d, ex2.1, ex2.2, ex3.1, ex3.2, ex4, steady, zero.
std::vector<std::string> problem_ids();
/// Parameter defaults of a problem (config_error for unknown ids).
TemperedParams default_params(const std::string &id);
/// Problem with the given parameters; the right-hand side is manufactured from the exact
/// solution when there is one.
Problem make_problem(const std::string &id, const TemperedParams &params);

/// Adaptive piecewise Chebyshev interpolant of a function on [a,b] (first-kind nodes, so
/// the endpoints are never sampled).
class PiecewiseChebyshev
{
public:
    PiecewiseChebyshev(const std::function<double(double)> &f, double a, double b, double tol = 1e-10,
                       int max_depth = 34);
    double operator()(double x) const;
    std::size_t panels() const { return lo_.size(); }

private:
    static constexpr int n_ = 16;
    std::vector<double> lo_, hi_;
    std::vector<std::array<double, n_>> vals_;
};

/// Spatial operator b.grad u + sum_axis coeff D u - reaction u applied to the exact
/// solution, evaluated by the smooth-function evaluators. Product-form solutions cache
/// interpolants of the 1D derivatives per time.
class ExactOperator
{
public:
    explicit ExactOperator(const Problem &problem);
    double operator()(const Point &p, double t);

private:
    const Problem *problem_;
    // (time, axis) -> interpolant of the combined fractional term of the 1D factor.
    std::map<std::pair<double, int>, std::shared_ptr<PiecewiseChebyshev>> cache_;
    double fractional_term(int axis, const Point &p, double t);
};

/// f = u_t + L u for a problem with an exact solution.
SpaceTimeField manufactured_rhs(const Problem &problem);

/// Source samples on a space: f at the volume points of every element for a given time,
/// with loads, time averages (3-point Gauss) and the time oscillation
/// (1/tau) int ||f - fbar||^2 dt. Time-split problems reuse two spatial sample sets.
class SourceField
{
public:
    SourceField(const Problem &problem, std::shared_ptr<const DgSpace> space, int quad_degree = -1);

    const std::vector<double> &samples(double t);
    Eigen::VectorXd load(double t);
    Eigen::VectorXd load_average(double t0, double t1);
    std::vector<double> samples_average(double t0, double t1);
    double time_oscillation(double t0, double t1);

    const std::vector<ElementQuad> &quad() const { return quad_; }
    int quad_degree() const { return degree_; }

private:
    const Problem *problem_;
    std::shared_ptr<const DgSpace> space_;
    int degree_;
    std::vector<ElementQuad> quad_;
    std::vector<double> split_u_, split_Lu_;
    bool split_ = false;
    std::map<double, std::vector<double>> cache_;
    Eigen::VectorXd load_from(const std::vector<double> &vals) const;
};

} // namespace tdg
