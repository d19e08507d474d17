// Acceptance criteria: one PASS/FAIL line each.

#include "tdg/harness.hpp"

#include "support/property_suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace tdg;

namespace
{

using Clock = std::chrono::steady_clock;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

RunConfig config(const std::string &text)
{
    std::istringstream is(text);
    return RunConfig::from_config(Config::parse(is, "<acceptance>"));
}

double slope(const std::vector<double> &x, const std::vector<double> &y) { return suite::detail::loglog_slope(x, y); }

Outcome crit1()
{
    const auto t0 = Clock::now();
    bool ok = true;
    std::string d;
    for (const auto &c : suite::calculus_suite(20240601))
    {
        ok = ok && c.pass;
        d += c.name + "=" + fmt(c.value, 3) + " ";
    }
    const double s = seconds_since(t0);
    return {ok && s < 30.0, d + "runtime=" + fmt(s, 3) + "s"};
}

Outcome crit2()
{
    const auto t0 = Clock::now();
    bool ok = true;
    std::string d;
    for (int N : {1, 2})
    {
        RunConfig rc = config("problem.id = poly1d\nmesh.levels = 4, 8, 16, 32, 64\ntime.rule = power\ndg.degree = " +
                              std::to_string(N) + "\n");
        const auto rows = run_convergence(rc);
        std::vector<double> e, h;
        for (const auto &r : rows)
        {
            e.push_back(r.l2_error);
            h.push_back(r.h);
        }
        const double p = fitted_order(e, h);
        ok = ok && p >= N + 0.4;
        d += "N=" + std::to_string(N) + " order=" + fmt(p) + " ";
    }
    const double s = seconds_since(t0);
    return {ok && s < 120.0, d + "runtime=" + fmt(s, 3) + "s"};
}

std::vector<ConvergenceRow> crit3_rows;

Outcome crit3()
{
    const auto t0 = Clock::now();
    const RunConfig rc = config("problem.id = ex2.1\nproblem.alpha = 0.2\nproblem.beta = 0.2\ndg.degree = 1\n"
                                "mesh.levels = 4, 8, 16\ntime.rule = power\nconverge.energy_check = true\n");
    crit3_rows = run_convergence(rc);
    std::vector<double> e, h;
    std::string d = "K/L2:";
    for (const auto &r : crit3_rows)
    {
        e.push_back(r.l2_error);
        h.push_back(r.h);
        d += " " + std::to_string(r.K) + "/" + fmt(r.l2_error, 3);
    }
    const double p = fitted_order(e, h);
    const double s = seconds_since(t0);
    return {p >= 1.5 && p <= 2.3 && s < 600.0, d + " order=" + fmt(p) + " runtime=" + fmt(s, 3) + "s"};
}

Outcome crit4()
{
    if (crit3_rows.empty())
        return {false, "criterion 3 runs missing"};
    double worst = 1e300;
    for (const auto &r : crit3_rows)
        worst = std::min(worst, r.energy_margin);
    return {worst >= -1e-8, "min(rhs - lhs) over all steps = " + fmt(worst)};
}

Outcome crit5()
{
    const suite::Check c = suite::upwind_identity(20240601);
    return {c.pass, "max |form - jump sum| over 100 vectors = " + fmt(c.value, 3)};
}

Outcome crit6()
{
    const auto t0 = Clock::now();
    RunConfig rc = config("problem.id = ex3.1\nmesh.n = 8\ndg.degree = 1\nadapt.tol_space = 1e-12\n"
                          "adapt.energy_error = false\nadapt.max_iterations = 6\n");
    const auto uni = run_adapt_stationary(rc, Scheme::uniform);
    rc.adapt.max_iterations = 40;
    const auto dwr = run_adapt_stationary(rc, Scheme::dwr);
    std::vector<double> uk, ue;
    for (const auto &r : uni)
    {
        uk.push_back(r.mesh->num_elements());
        ue.push_back(r.l2_error);
    }
    // Uniform error at K by log-log interpolation between neighbouring uniform meshes.
    auto uniform_at = [&](double K) {
        for (std::size_t i = 0; i + 1 < uk.size(); ++i)
            if (K >= uk[i] && K <= uk[i + 1])
            {
                const double w = std::log(K / uk[i]) / std::log(uk[i + 1] / uk[i]);
                return std::exp((1 - w) * std::log(ue[i]) + w * std::log(ue[i + 1]));
            }
        return std::nan("");
    };
    double worst_ratio = 0.0;
    int matched = 0;
    std::vector<double> dk, de;
    for (const auto &r : dwr)
    {
        const double K = r.mesh->num_elements();
        if (K < 64)
            continue;
        dk.push_back(K);
        de.push_back(r.l2_error);
        const double u = uniform_at(K);
        if (std::isfinite(u))
        {
            worst_ratio = std::max(worst_ratio, r.l2_error / u);
            ++matched;
        }
    }
    const double sl = dk.size() >= 2 ? slope(dk, de) : std::nan("");
    const double s = seconds_since(t0);
    const bool ok = matched > 0 && worst_ratio <= 0.5 && std::abs(sl + 2.0) <= 0.4 && s < 120.0;
    return {ok, "matched meshes=" + std::to_string(matched) + " max(dwr/uniform)=" + fmt(worst_ratio, 3) +
                    " dwr slope (K>=64, " + std::to_string(dk.size()) + " meshes, K up to " +
                    fmt(dk.empty() ? 0 : dk.back(), 4) + ")=" + fmt(sl) + " runtime=" + fmt(s, 3) + "s"};
}

Outcome crit7()
{
    RunConfig rc = config("problem.id = ex3.2\nmesh.n = 2\ndg.degree = 1\nadapt.tol_space = 1e-12\n"
                          "adapt.max_iterations = 8\n");
    bool ok = true;
    std::string d;
    for (Scheme sc : {Scheme::energy, Scheme::dwr})
    {
        const auto its = run_adapt_stationary(rc, sc);
        double lo = 1e300, hi = 0.0;
        for (const auto &r : its)
        {
            lo = std::min(lo, r.i_eff);
            hi = std::max(hi, r.i_eff);
        }
        const bool good = its.size() >= 6 && hi / lo <= 4.0;
        ok = ok && good;
        d += std::string(to_string(sc)) + ": " + std::to_string(its.size()) + " iterations, I_eff in [" + fmt(lo) +
             ", " + fmt(hi) + "], ratio " + fmt(hi / lo) + "; ";
    }
    return {ok, d};
}

Outcome crit8()
{
    RunConfig rc = config("problem.id = ex3.1\nmesh.n = 8\ndg.degree = 1\nadapt.tol_space = 1e-12\n"
                          "adapt.max_iterations = 20\n");
    const auto its = run_adapt_stationary(rc, Scheme::energy);
    const double e0 = its[0].energy_error;
    const double C1 = e0 * e0 / its[0].ind.sum_sq();
    double violation = 0.0;
    double c2_lo = 1e300, c2_hi = 0.0;
    for (const auto &r : its)
    {
        const double e2 = r.energy_error * r.energy_error;
        violation = std::max(violation, e2 / (C1 * r.ind.sum_sq()) - 1.0);
        double osc2 = 0.0;
        for (double o : r.ind.osc)
            osc2 += o * o;
        const double C2 = r.ind.sum_sq() / (e2 + osc2);
        c2_lo = std::min(c2_lo, C2);
        c2_hi = std::max(c2_hi, C2);
    }
    const bool ok = violation <= 0.05 && c2_hi / c2_lo <= 3.0;
    return {ok, std::to_string(its.size()) + " meshes, C1=" + fmt(C1) + " max violation=" + fmt(violation) +
                    " C2 in [" + fmt(c2_lo) + ", " + fmt(c2_hi) + "] ratio " + fmt(c2_hi / c2_lo)};
}

Outcome crit9()
{
    const auto t0 = Clock::now();
    const RunConfig rc = config("problem.id = ex4\nmesh.n = 8\ndg.degree = 1\ntime.tau0 = 0.02\n"
                                "time.output_times = 0.25, 0.5, 0.75, 1\nadapt.tol_time = 2e-2\n"
                                "adapt.tol_space = 1e-2\nadapt.max_elements = 6000\n");
    const EvolutionRun run = run_adapt_evolution(rc);
    const double s = seconds_since(t0);
    bool ok = run.snapshots.size() == 4;
    std::string d = "dist at t =";
    for (const auto &snap : run.snapshots)
    {
        // Every element of minimum diameter must sit near the bump centre.
        double worst = 0.0;
        for (const Point &c : snap.finest)
            worst = std::max(worst, std::hypot(c[0] - snap.t, c[1] - snap.t));
        ok = ok && worst <= 0.25;
        d += " " + fmt(snap.t, 3) + ":" + fmt(worst, 3) + "(" + std::to_string(snap.finest.size()) + " el)";
    }
    ok = ok && s < 600.0;

    const RunConfig rs = config("problem.id = steady\nmesh.n = 4\ndg.degree = 1\ntime.tau0 = 0.02\n"
                                "time.output_times = 0.5, 1\nadapt.tol_time = 2e-2\nadapt.tol_space = 1e-1\n");
    const EvolutionRun st = run_adapt_evolution(rs);
    int halvings = 0;
    for (const auto &r : st.records)
        halvings += r.halvings;
    ok = ok && halvings == 0;
    return {ok, d + "; ex4 steps=" + std::to_string(run.records.size()) + " runtime=" + fmt(s, 3) +
                    "s; steady: steps=" + std::to_string(st.records.size()) + " halvings=" + std::to_string(halvings)};
}

Outcome crit10()
{
    std::vector<double> slopes;
    const suite::Check c = suite::inverse_inequality(20240601, &slopes);
    std::string d = "fitted exponents:";
    for (double s : slopes)
        d += " " + fmt(s, 5);
    return {c.pass, d + " (alpha = 0.4 x3, 0.8 x3), max deviation " + fmt(c.value, 3)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 tempered-calculus property suite", crit1},
        {"2 one-dimensional convergence order", crit2},
        {"3 Example 2.1 convergence order", crit3},
        {"4 discrete energy inequality", crit4},
        {"5 upwind identity", crit5},
        {"6 DWR vs uniform on Example 3.1", crit6},
        {"7 effectiveness-index stability on Example 3.2", crit7},
        {"8 reliability and efficiency constants", crit8},
        {"9 evolution adaptivity on Example 4", crit9},
        {"10 inverse-inequality scaling", crit10},
    };
    int failed = 0;
    for (const auto &[name, fn] : criteria)
    {
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
