#pragma once

#include "tdg/dg_space.hpp"
#include "tdg/tempered.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace tdg
{

using SpMat = Eigen::SparseMatrix<double>;

/// Quadrature for integrals of products of one-dimensional fractional derivatives over the
/// domain. The domain is cut into strips between consecutive vertex ordinates; each strip
/// carries a graded rule in the ordinate, and every chord of a ray a graded rule along it.
/// Negative entries pick defaults that depend on the dimension and the degree.
struct FracQuadOptions
{
    int levels = -1;
    int points = -1;
    double ratio = 0.2;
    int y_levels = 2;
    int y_points = -1;
    double y_ratio = 0.2;
};

struct RayChord
{
    int elem;
    double s0, s1;
    std::vector<double> x; // points along the ray
    std::vector<double> w; // weights including the ordinate weight
};

struct Ray
{
    Axis axis;
    double ordinate;
    std::vector<RayChord> chords;
};

/// Singularity exponents folded into the innermost pieces at the chord ends.
std::vector<Ray> build_rays(const Mesh &mesh, Axis axis, const FracQuadOptions &opts, int degree,
                            double exp_left, double exp_right);

/// Restriction of the basis of element e to the chord [s0,s1] of a ray: row j holds the
/// monomial coefficients of basis j in t = (x - s0)/(s1 - s0).
Eigen::MatrixXd chord_basis(const DgSpace &space, int e, Axis axis, double ordinate, double s0,
                            double s1);

/// Derivatives of order mu of the monomials t^k (k <= kmax) of each source chord
/// [s0[c], s1[c]] at the points xs; point q lies inside chord owner[q]. Entry
/// (q, c*(kmax+1) + k) is filled for sources on the requested side of the point (including
/// its own chord) and zero otherwise. Well separated pairs go through interpolation on
/// dyadic panels.
void derivative_table(const std::vector<double> &s0, const std::vector<double> &s1,
                      const std::vector<double> &xs, const std::vector<int> &owner, double mu,
                      double lambda, Side side, int kmax, Eigen::MatrixXd &out);

enum class Pairing
{
    left_right, // (D_left phi_j, D_right phi_i)
    left_left,  // (D_left phi_j, D_left phi_i)
};

/// Matrix with entry (i, j) = sum over the domain of the chosen pairing of derivatives of
/// order mu in (0,1) along `axis` of basis functions j (trial) and i (test).
SpMat fractional_pairing(const DgSpace &space, Axis axis, double mu, double lambda, Pairing pairing,
                         const FracQuadOptions &opts = {});

/// Derivative of order mu in (0,1) along `axis` of the global DG function u (zero outside
/// the domain) at p, which must lie inside element e.
double dg_fractional_derivative(const DgFunction &u, Axis axis, double mu, double lambda, Side side,
                                int e, const Point &p);

/// Same at many points of one element at once (shares nothing but the call overhead).
std::vector<double> dg_fractional_derivative(const DgFunction &u, Axis axis, double mu, double lambda,
                                             Side side, int e, const std::vector<Point> &pts);

/// Per-element integral of (D_left^mu u_h - g)^2 along `axis`, where g(p) is the exact
/// derivative of the reference solution (pass nullptr for g = 0).
std::vector<double> fractional_seminorm_sq(const DgFunction &u, Axis axis, double mu, double lambda,
                                           const std::function<double(const Point &)> &g,
                                           const FracQuadOptions &opts = {});

/// Broken energy norm: left seminorms of orders alpha/2 (x) and beta/2 (y) plus the jumps
/// over all faces.
double energy_norm(const DgFunction &u, const TemperedParams &params, const FracQuadOptions &opts = {});
double energy_norm(const DgFunction &u, double alpha, double beta, double lambda,
                   const FracQuadOptions &opts = {});

/// Per-element integral of (D_left^mu (u_h - u))^2 along `axis` for a known function u that
/// vanishes outside the domain. Along every ray the difference is represented by piecewise
/// polynomials of the given degree, subdivided until the fit error is below tol times max|u|.
std::vector<double> fractional_error_sq(const DgFunction &u, Axis axis, double mu, double lambda,
                                        const std::function<double(const Point &)> &exact,
                                        const FracQuadOptions &opts = {}, double tol = 1e-9,
                                        int degree = 10);

/// Energy norm of u_h - u: jumps of u_h plus the two error seminorms (u continuous, zero on
/// the boundary).
double energy_error(const DgFunction &u, const std::function<double(const Point &)> &exact, double alpha,
                    double beta, double lambda, const FracQuadOptions &opts = {});

} // namespace tdg
