#pragma once

#include "tdg/estimate.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tdg
{

struct AdaptConfig
{
    double theta1 = 0.5;
    double theta2 = 0.5;
    double tol_space = 1e-3;
    double tol_time = 1e-3;
    int max_iterations = 10;
    double coarsen_fraction = 0.1;
    double timestep_growth = 1.5;
    /// Refinement stops (stationary) or aborts (evolution) beyond this element count.
    int max_elements = 4000;
    /// Genealogy levels a single coarsening step may undo.
    int coarsen_passes = 6;
    double min_tau = 1e-8;
    /// Refine/coarsen passes per evolution step.
    int max_space_passes = 6;

    void validate() const;
};

enum class Scheme
{
    energy,
    dwr,
    uniform,
};

Scheme parse_scheme(const std::string &s);
const char *to_string(Scheme s);

struct StationaryIteration
{
    int iteration = 0;
    std::shared_ptr<const Mesh> mesh;
    DgFunction u;
    IndicatorField ind;
    double l2_error = std::nan("");
    double energy_error = std::nan("");
    double i_eff = std::nan("");
    bool stagnating = false;
};

struct StationaryOptions
{
    int degree = 1;
    FracQuadOptions quad;
    /// Ray quadrature for the exact energy error (diagnostics only).
    FracQuadOptions diag_quad;
    bool compute_energy_error = true;
    /// Dual goal weighted by the exact error instead of the residual.
    bool exact_goal = false;
    std::function<void(const StationaryIteration &)> on_iteration;
};

/// Solve, estimate, mark (strategy C) and refine until sum eta_T^2 <= tol_space^2 (energy),
/// sum eta_T <= tol_space (DWR), max_iterations, or the element cap. The uniform scheme refines
/// every element and reports the energy indicator.
std::vector<StationaryIteration> adapt_stationary(const Problem &problem, std::shared_ptr<const Mesh> initial,
                                                  const AdaptConfig &config, Scheme scheme,
                                                  const StationaryOptions &opts = {});

struct EvolutionRecord
{
    int step = 0;
    double t = 0.0;
    double tau = 0.0;
    int K = 0;
    double eta_time1 = 0.0;
    double eta_time2 = 0.0;
    double eta_space = 0.0;
    int halvings = 0;
    int refinements = 0;
    int coarsenings = 0;
    double l2_error = std::nan("");
    /// max h_T^s / tau diagnostic.
    double c_hat = 0.0;
};

/// Adaptive backward Euler with time-step and mesh control for one problem.
class EvolutionAdaptor
{
public:
    EvolutionAdaptor(const Problem &problem, std::shared_ptr<const Mesh> initial, int degree, const AdaptConfig &config,
                     double tau0, const FracQuadOptions &quad = {});

    /// One accepted step, never passing t_stop.
    EvolutionRecord step(double t_stop);
    /// Steps until t_end, calling back after each accepted step.
    std::vector<EvolutionRecord> run(double t_end, const std::vector<double> &output_times,
                                     const std::function<void(const EvolutionRecord &, bool output)> &cb = {});

    double time() const { return t_; }
    double next_tau() const { return tau_; }
    const DgFunction &solution() const { return u_; }
    std::shared_ptr<const Mesh> mesh() const { return mesh_; }

private:
    const Problem *problem_;
    AdaptConfig cfg_;
    FracQuadOptions quad_;
    int degree_;
    double t_ = 0.0;
    double tau_;
    int step_ = 0;
    std::shared_ptr<const Mesh> mesh_;
    DgFunction u_;
};

} // namespace tdg
