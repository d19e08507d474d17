#include "tdg/adapt.hpp"

#include "tdg/error.hpp"
#include "tdg/log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tdg
{

void AdaptConfig::validate() const
{
    auto check = [](bool ok, const char *what) { require(ok, ErrorKind::config_error, what); };
    check(theta1 > 0.0 && theta1 < 1.0, "adapt.theta1 must lie in (0,1)");
    check(theta2 > 0.0 && theta2 < 1.0, "adapt.theta2 must lie in (0,1)");
    check(tol_space > 0.0, "adapt.tol_space must be positive");
    check(tol_time > 0.0, "adapt.tol_time must be positive");
    check(max_iterations >= 1, "adapt.max_iterations must be at least 1");
    check(coarsen_fraction >= 0.0 && coarsen_fraction < 1.0, "adapt.coarsen_fraction must lie in [0,1)");
    check(timestep_growth >= 1.0, "adapt.timestep_growth must be at least 1");
    check(max_elements >= 1, "adapt.max_elements must be positive");
    check(coarsen_passes >= 0, "adapt.coarsen_passes must be nonnegative");
    check(min_tau > 0.0, "adapt.min_tau must be positive");
    check(max_space_passes >= 0, "adapt.max_space_passes must be nonnegative");
}

Scheme parse_scheme(const std::string &s)
{
    if (s == "energy")
        return Scheme::energy;
    if (s == "dwr")
        return Scheme::dwr;
    if (s == "uniform")
        return Scheme::uniform;
    throw Error(ErrorKind::config_error, "unknown scheme '" + s + "' (energy|dwr|uniform)");
}

const char *to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::energy:
        return "energy";
    case Scheme::dwr:
        return "dwr";
    case Scheme::uniform:
        return "uniform";
    }
    return "?";
}

std::vector<StationaryIteration> adapt_stationary(const Problem &problem, std::shared_ptr<const Mesh> initial,
                                                  const AdaptConfig &config, Scheme scheme,
                                                  const StationaryOptions &opts)
{
    config.validate();
    require(problem.stationary || problem.exact, ErrorKind::invalid_input, "stationary adaptivity needs a stationary problem");
    const OperatorModel &model = problem.model;
    const int N = opts.degree;
    std::vector<StationaryIteration> out;
    std::shared_ptr<const Mesh> mesh = std::move(initial);
    ScalarField exact;
    if (problem.exact)
    {
        const SpaceTimeField u = problem.exact->u;
        exact = [u](const Point &x) { return u(x, 0.0); };
    }

    for (int it = 1; it <= config.max_iterations; ++it)
    {
        auto space = std::make_shared<DgSpace>(mesh, N);
        const AssembledSystem sys = build_system(space, model, opts.quad);
        SourceField load_src(problem, space);
        StationaryIteration rec;
        rec.iteration = it;
        rec.mesh = mesh;
        rec.u = solve_stationary(sys, load_src.load(0.0));

        SourceField res_src(problem, space, 2 * N + 2);
        const ResidualField R = residual_field(rec.u, model, res_src.quad(), res_src.samples(0.0));
        if (scheme == Scheme::dwr)
        {
            GoalLoad goal;
            if (opts.exact_goal && exact)
            {
                std::vector<std::vector<double>> err(R.quad.size());
                for (std::size_t e = 0; e < R.quad.size(); ++e)
                    for (std::size_t i = 0; i < R.quad[e].points.size(); ++i)
                        err[e].push_back(exact(R.quad[e].points[i]) - rec.u.value_ref(int(e), R.quad[e].ref[i]));
                goal = weighted_goal(R.quad, err);
            }
            else
            {
                goal = weighted_goal(R.quad, R.values);
            }
            rec.ind = dwr_indicator(rec.u, model, R, goal, opts.quad).ind;
        }
        else
        {
            rec.ind = energy_indicator(rec.u, model, R, JumpWeight::full);
        }

        if (exact)
        {
            rec.l2_error = l2_error(rec.u, exact);
            if (opts.compute_energy_error)
            {
                rec.energy_error = energy_error(rec.u, exact, model.axis[0].order, model.axis[1].order, model.lambda,
                                                opts.diag_quad);
                if (rec.energy_error > 0.0)
                    rec.i_eff = effectiveness_index(rec.ind, rec.energy_error);
            }
        }
        if (out.size() >= 3)
        {
            const std::size_t n = out.size();
            rec.stagnating = rec.ind.total >= out[n - 1].ind.total && out[n - 1].ind.total >= out[n - 2].ind.total &&
                             out[n - 2].ind.total >= out[n - 3].ind.total;
            if (rec.stagnating)
                log_message(LogLevel::info, "warning: total indicator has not decreased for 3 iterations");
        }
        {
            std::ostringstream os;
            os << to_string(scheme) << " iteration " << it << ": K=" << mesh->num_elements() << " eta=" << rec.ind.total
               << " L2=" << rec.l2_error << " energy=" << rec.energy_error;
            log_message(LogLevel::info, os.str());
        }
        if (opts.on_iteration)
            opts.on_iteration(rec);
        out.push_back(rec);

        const bool converged = scheme == Scheme::dwr ? rec.ind.total <= config.tol_space
                                                     : rec.ind.sum_sq() <= config.tol_space * config.tol_space;
        if ((converged && scheme != Scheme::uniform) || it == config.max_iterations)
            break;
        Mesh next;
        if (scheme == Scheme::uniform)
        {
            next = refine_uniform(*mesh);
        }
        else
        {
            const std::set<int> marked = mark_strategy_c(rec.ind, config.theta1, config.theta2);
            if (marked.empty())
                break;
            next = refine(*mesh, marked);
        }
        if (next.num_elements() > config.max_elements)
        {
            log_message(LogLevel::info, "element cap reached; stopping refinement");
            break;
        }
        mesh = std::make_shared<Mesh>(std::move(next));
    }
    return out;
}

namespace
{

// Everything that depends on the current mesh and step size within one evolution step.
struct StepContext
{
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const DgSpace> space;
    std::unique_ptr<AssembledSystem> sys;
    std::unique_ptr<BackwardEuler> be;
    std::unique_ptr<SourceField> load_src, res_src;
    DgFunction u_prev;
    DgFunction u;
};

} // namespace

EvolutionAdaptor::EvolutionAdaptor(const Problem &problem, std::shared_ptr<const Mesh> initial, int degree,
                                   const AdaptConfig &config, double tau0, const FracQuadOptions &quad)
    : problem_(&problem), cfg_(config), quad_(quad), degree_(degree), tau_(tau0), mesh_(std::move(initial))
{
    cfg_.validate();
    require(tau0 > 0.0, ErrorKind::config_error, "initial time step must be positive");
    require(bool(problem.initial), ErrorKind::invalid_input, "evolution needs an initial condition");
    auto space = std::make_shared<DgSpace>(mesh_, degree_);
    u_ = l2_project(space, problem.initial);
}

EvolutionRecord EvolutionAdaptor::step(double t_stop)
{
    const Problem &pr = *problem_;
    require(t_stop > t_, ErrorKind::invalid_input, "step target lies in the past");
    double tau = std::min(tau_, t_stop - t_);
    const bool clipped = tau < tau_;
    EvolutionRecord rec;
    rec.step = step_ + 1;

    StepContext ctx;
    auto set_mesh = [&](std::shared_ptr<const Mesh> mesh) {
        ctx.mesh = std::move(mesh);
        ctx.space = std::make_shared<DgSpace>(ctx.mesh, degree_);
        ctx.sys = std::make_unique<AssembledSystem>(build_system(ctx.space, pr.model, quad_));
        ctx.be = std::make_unique<BackwardEuler>(*ctx.sys);
        ctx.load_src = std::make_unique<SourceField>(pr, ctx.space);
        ctx.res_src = std::make_unique<SourceField>(pr, ctx.space, 2 * degree_ + 2);
        ctx.u_prev = ctx.mesh == mesh_ ? u_ : transfer(u_, ctx.space);
    };
    auto solve = [&]() {
        EvolutionState st{t_, tau, ctx.u_prev, step_};
        ctx.u = ctx.be->step(st, tau, ctx.load_src->load_average(t_, t_ + tau)).u;
    };
    auto time_eta = [&]() {
        const auto [e1, e2] = time_indicators(ctx.u, ctx.u_prev, *ctx.load_src, t_, t_ + tau);
        rec.eta_time1 = e1;
        rec.eta_time2 = e2;
        return e1 + e2;
    };

    // 1. Time-step control on the previous mesh.
    set_mesh(mesh_);
    for (;;)
    {
        solve();
        if (time_eta() <= cfg_.tol_time)
            break;
        if (tau * 0.5 < cfg_.min_tau)
            throw Error(ErrorKind::adapt_abort, "time step fell below the minimum");
        tau *= 0.5;
        ++rec.halvings;
    }

    // 2. Coarsen once, then refine until the space indicator meets the tolerance.
    auto space_indicator = [&]() {
        const TimeTerm tt{&ctx.u_prev, tau};
        const std::vector<double> fbar = ctx.res_src->samples_average(t_, t_ + tau);
        const ResidualField R = residual_field(ctx.u, pr.model, ctx.res_src->quad(), fbar, &tt);
        return energy_indicator(ctx.u, pr.model, R, JumpWeight::half);
    };
    IndicatorField ind = space_indicator();
    if (cfg_.coarsen_fraction > 0.0 && cfg_.coarsen_passes > 0)
    {
        const int K = ctx.mesh->num_elements();
        const double mean = std::accumulate(ind.eta.begin(), ind.eta.end(), 0.0) / K;
        std::set<int> cand;
        for (int e = 0; e < K; ++e)
            if (ind.eta[e] < cfg_.coarsen_fraction * mean)
                cand.insert(e);
        if (!cand.empty())
        {
            auto coarse = std::make_shared<const Mesh>(coarsen(*ctx.mesh, cand, cfg_.coarsen_passes));
            if (coarse->num_elements() < K)
            {
                set_mesh(coarse);
                solve();
                ind = space_indicator();
                ++rec.coarsenings;
            }
        }
    }
    for (int pass = 0; pass < cfg_.max_space_passes && ind.sum_sq() > cfg_.tol_space; ++pass)
    {
        const std::set<int> marked = mark_strategy_c(ind, cfg_.theta1, cfg_.theta2);
        if (marked.empty())
            break;
        auto fine = std::make_shared<const Mesh>(refine(*ctx.mesh, marked));
        if (fine->num_elements() > cfg_.max_elements)
        {
            std::ostringstream os;
            os << "refinement would exceed the element cap (" << fine->num_elements() << " > " << cfg_.max_elements
               << ") at t=" << t_ + tau << " with eta_space=" << ind.sum_sq();
            throw Error(ErrorKind::adapt_abort, os.str());
        }
        set_mesh(fine);
        solve();
        ind = space_indicator();
        ++rec.refinements;
    }
    const double eta_time = time_eta();
    rec.eta_space = ind.sum_sq();

    // 3. Step-size proposal for the next step.
    double next = tau;
    if (eta_time <= 0.25 * cfg_.tol_time)
        next = cfg_.timestep_growth * tau;
    if (clipped && rec.halvings == 0)
        next = std::max(next, tau_);
    tau_ = next;

    t_ += tau;
    ++step_;
    mesh_ = ctx.mesh;
    u_ = ctx.u;
    rec.t = t_;
    rec.tau = tau;
    rec.K = mesh_->num_elements();
    const double s = residual_exponent(pr.model);
    for (int e = 0; e < rec.K; ++e)
        rec.c_hat = std::max(rec.c_hat, std::pow(mesh_->diameter(e), s) / tau);
    if (pr.exact)
    {
        const SpaceTimeField u = pr.exact->u;
        const double t = t_;
        rec.l2_error = l2_error(u_, [&](const Point &x) { return u(x, t); });
    }
    std::ostringstream os;
    os << "step " << rec.step << ": t=" << rec.t << " tau=" << rec.tau << " K=" << rec.K << " eta_time=" << eta_time
       << " eta_space=" << rec.eta_space << " halvings=" << rec.halvings;
    log_message(LogLevel::info, os.str());
    return rec;
}

std::vector<EvolutionRecord> EvolutionAdaptor::run(double t_end, const std::vector<double> &output_times,
                                                   const std::function<void(const EvolutionRecord &, bool)> &cb)
{
    std::vector<double> stops;
    for (double t : output_times)
        if (t > t_ && t < t_end)
            stops.push_back(t);
    stops.push_back(t_end);
    std::sort(stops.begin(), stops.end());
    std::vector<EvolutionRecord> out;
    for (double stop : stops)
        while (t_ < stop - 1e-12 * std::max(1.0, std::abs(stop)))
        {
            out.push_back(step(stop));
            const bool at_output = std::abs(t_ - stop) <= 1e-12 * std::max(1.0, std::abs(stop));
            if (at_output)
                t_ = stop;
            if (cb)
                cb(out.back(), at_output);
        }
    return out;
}

} // namespace tdg
