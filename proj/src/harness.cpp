#include "tdg/harness.hpp"

#include "tdg/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tdg
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos == v.size() && std::isfinite(d))
            return d;
    }
    catch (const std::exception &)
    {
    }
    throw Error(ErrorKind::config_error, "'" + key + "' expects a number, got '" + v + "'");
}

int parse_int(const std::string &key, const std::string &v)
{
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        throw Error(ErrorKind::config_error, "'" + key + "' expects an integer, got '" + v + "'");
    return int(d);
}

// Shortest round-trip text of a double, stable across runs.
std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// Config

Config Config::parse(std::istream &is, const std::string &source)
{
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw Error(ErrorKind::config_error, where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw Error(ErrorKind::config_error, where + ": empty key or value");
        if (c.has(key))
            throw Error(ErrorKind::config_error, where + ": duplicate key '" + key + "'");
        c.values_[key] = value;
    }
    return c;
}

Config Config::load(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::config_error, "cannot open config file '" + path + "'");
    return parse(in, path);
}

void Config::set(const std::string &key, const std::string &value) { values_[key] = value; }

std::string Config::get_string(const std::string &key, const std::string &def) const
{
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

double Config::get_double(const std::string &key, double def) const
{
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_double(key, it->second);
}

int Config::get_int(const std::string &key, int def) const
{
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_int(key, it->second);
}

bool Config::get_bool(const std::string &key, bool def) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    const std::string &v = it->second;
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw Error(ErrorKind::config_error, "'" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string &key, const std::vector<double> &def) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    std::vector<double> out;
    for (const std::string &s : split_list(it->second))
        out.push_back(parse_double(key, s));
    if (out.empty())
        throw Error(ErrorKind::config_error, "'" + key + "' is an empty list");
    return out;
}

std::vector<int> Config::get_ints(const std::string &key, const std::vector<int> &def) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return def;
    std::vector<int> out;
    for (const std::string &s : split_list(it->second))
        out.push_back(parse_int(key, s));
    if (out.empty())
        throw Error(ErrorKind::config_error, "'" + key + "' is an empty list");
    return out;
}

void Config::require_known(const std::set<std::string> &allowed) const
{
    for (const auto &kv : values_)
        if (!allowed.count(kv.first))
            throw Error(ErrorKind::config_error, "unknown configuration key '" + kv.first + "'");
}

// ---------------------------------------------------------------------------
// RunConfig

const std::set<std::string> &RunConfig::keys()
{
    static const std::set<std::string> k{
        "problem.id",          "problem.alpha",        "problem.beta",          "problem.lambda",
        "problem.kappa1",      "problem.kappa2",       "problem.b1",            "problem.b2",
        "problem.final_time",  "dg.degree",            "mesh.n",                "mesh.file",
        "mesh.levels",         "time.rule",            "time.power",            "time.tau",
        "time.tau0",           "time.output_times",    "converge.energy_check", "adapt.theta1",
        "adapt.theta2",        "adapt.tol_space",      "adapt.tol_time",        "adapt.max_iterations",
        "adapt.coarsen_fraction", "adapt.timestep_growth", "adapt.max_elements", "adapt.coarsen_passes",
        "adapt.min_tau",       "adapt.max_space_passes", "adapt.scheme",        "adapt.exact_goal",
        "adapt.energy_error",  "run.jobs",
    };
    return k;
}

RunConfig RunConfig::from_config(const Config &cfg)
{
    cfg.require_known(keys());
    RunConfig rc;
    rc.problem = cfg.get_string("problem.id", rc.problem);
    TemperedParams p = default_params(rc.problem);
    p.alpha = cfg.get_double("problem.alpha", p.alpha);
    p.beta = cfg.get_double("problem.beta", p.beta);
    p.lambda = cfg.get_double("problem.lambda", p.lambda);
    p.kappa1 = cfg.get_double("problem.kappa1", p.kappa1);
    p.kappa2 = cfg.get_double("problem.kappa2", p.kappa2);
    p.b[0] = cfg.get_double("problem.b1", p.b[0]);
    p.b[1] = cfg.get_double("problem.b2", p.b[1]);
    auto order_ok = [](double a) { return a > 0.0 && a < 2.0 && a != 1.0; };
    require(order_ok(p.alpha) && order_ok(p.beta), ErrorKind::config_error,
            "problem.alpha and problem.beta must lie in (0,2) without 1");
    require(p.lambda >= 0.0, ErrorKind::config_error, "problem.lambda must be nonnegative");
    require(p.kappa1 > 0.0 && p.kappa2 > 0.0, ErrorKind::config_error, "diffusion coefficients must be positive");
    p.finalize();
    rc.params = p;
    rc.final_time = cfg.get_double("problem.final_time", rc.final_time);
    require(rc.final_time > 0.0, ErrorKind::config_error, "problem.final_time must be positive");

    rc.degree = cfg.get_int("dg.degree", rc.degree);
    require(rc.degree >= 1 && rc.degree <= 4, ErrorKind::config_error, "dg.degree must lie in 1..4");
    rc.mesh_n = cfg.get_int("mesh.n", rc.mesh_n);
    require(rc.mesh_n >= 1, ErrorKind::config_error, "mesh.n must be positive");
    rc.mesh_file = cfg.get_string("mesh.file", "");
    rc.levels = cfg.get_ints("mesh.levels", rc.levels);
    for (int n : rc.levels)
        require(n >= 1, ErrorKind::config_error, "mesh.levels entries must be positive");

    rc.time_rule = cfg.get_string("time.rule", rc.time_rule);
    require(rc.time_rule == "power" || rc.time_rule == "fixed", ErrorKind::config_error,
            "time.rule must be 'power' or 'fixed'");
    rc.time_power = cfg.get_double("time.power", rc.degree + 1.0);
    rc.time_tau = cfg.get_double("time.tau", rc.time_tau);
    require(rc.time_power > 0.0 && rc.time_tau > 0.0, ErrorKind::config_error, "time step settings must be positive");
    rc.tau0 = cfg.get_double("time.tau0", rc.tau0);
    require(rc.tau0 > 0.0, ErrorKind::config_error, "time.tau0 must be positive");
    rc.output_times = cfg.get_doubles("time.output_times", rc.output_times);
    for (double t : rc.output_times)
        require(t > 0.0 && t <= rc.final_time, ErrorKind::config_error, "output times must lie in (0, final_time]");
    rc.energy_check = cfg.get_bool("converge.energy_check", rc.energy_check);

    AdaptConfig &a = rc.adapt;
    a.theta1 = cfg.get_double("adapt.theta1", a.theta1);
    a.theta2 = cfg.get_double("adapt.theta2", a.theta2);
    a.tol_space = cfg.get_double("adapt.tol_space", a.tol_space);
    a.tol_time = cfg.get_double("adapt.tol_time", a.tol_time);
    a.max_iterations = cfg.get_int("adapt.max_iterations", a.max_iterations);
    a.coarsen_fraction = cfg.get_double("adapt.coarsen_fraction", a.coarsen_fraction);
    a.timestep_growth = cfg.get_double("adapt.timestep_growth", a.timestep_growth);
    a.max_elements = cfg.get_int("adapt.max_elements", a.max_elements);
    a.coarsen_passes = cfg.get_int("adapt.coarsen_passes", a.coarsen_passes);
    a.min_tau = cfg.get_double("adapt.min_tau", a.min_tau);
    a.max_space_passes = cfg.get_int("adapt.max_space_passes", a.max_space_passes);
    a.validate();
    rc.scheme = parse_scheme(cfg.get_string("adapt.scheme", to_string(rc.scheme)));
    rc.exact_goal = cfg.get_bool("adapt.exact_goal", rc.exact_goal);
    rc.energy_error = cfg.get_bool("adapt.energy_error", rc.energy_error);
    rc.jobs = cfg.get_int("run.jobs", rc.jobs);
    require(rc.jobs >= 1, ErrorKind::config_error, "run.jobs must be positive");
    return rc;
}

Problem RunConfig::make_problem() const
{
    Problem p = tdg::make_problem(problem, params);
    p.final_time = final_time;
    return p;
}

std::shared_ptr<const Mesh> RunConfig::initial_mesh(int n) const
{
    const Problem p = tdg::make_problem(problem, params);
    if (!mesh_file.empty())
    {
        std::ifstream in(mesh_file);
        require(bool(in), ErrorKind::config_error, "cannot open mesh file '" + mesh_file + "'");
        auto m = std::make_shared<Mesh>(Mesh::read(in));
        require(m->dim() == p.dim, ErrorKind::config_error, "mesh dimension does not match the problem");
        return m;
    }
    if (p.dim == 1)
        return std::make_shared<Mesh>(build_interval_mesh(p.domain[0], p.domain[1], n));
    return std::make_shared<Mesh>(build_structured_tri_mesh(p.domain[0], p.domain[1], p.domain[2], p.domain[3], n, n));
}

// ---------------------------------------------------------------------------
// Convergence

std::vector<double> convergence_order(const std::vector<double> &errors, const std::vector<double> &h)
{
    require(errors.size() == h.size() && errors.size() >= 2, ErrorKind::invalid_input,
            "convergence order needs matched lists of length >= 2");
    for (std::size_t i = 0; i < errors.size(); ++i)
        require(errors[i] > 0.0 && h[i] > 0.0 && std::isfinite(errors[i]), ErrorKind::invalid_input,
                "errors and mesh sizes must be positive");
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    {
        require(h[i] != h[i + 1], ErrorKind::invalid_input, "equal mesh sizes");
        out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(h[i] / h[i + 1]));
    }
    return out;
}

double fitted_order(const std::vector<double> &errors, const std::vector<double> &h)
{
    convergence_order(errors, h); // validation
    const std::size_t n = errors.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mx += std::log(h[i]) / n;
        my += std::log(errors[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxy += (std::log(h[i]) - mx) * (std::log(errors[i]) - my);
        sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    }
    return sxy / sxx;
}

namespace
{

ConvergenceRow convergence_level(const RunConfig &rc, int n)
{
    const Problem pr = rc.make_problem();
    require(bool(pr.exact), ErrorKind::config_error, "convergence studies need a problem with an exact solution");
    auto mesh = rc.initial_mesh(n);
    auto space = std::make_shared<DgSpace>(mesh, rc.degree);
    const AssembledSystem sys = build_system(space, pr.model);
    SourceField src(pr, space);
    ConvergenceRow row;
    row.n = n;
    row.K = mesh->num_elements();
    row.dof = space->ndofs();
    row.h = mesh->h_max();
    const SpaceTimeField uex = pr.exact->u;
    if (pr.stationary)
    {
        const DgFunction u = solve_stationary(sys, src.load(0.0));
        row.l2_error = l2_error(u, [&](const Point &x) { return uex(x, 0.0); });
        return row;
    }
    const double T = pr.final_time;
    const double target = rc.time_rule == "power" ? std::pow(row.h, rc.time_power) : rc.time_tau;
    row.steps = std::max(1, int(std::ceil(T / target - 1e-9)));
    row.tau = T / row.steps;
    const double gamma = std::min({pr.params.kappa1, pr.params.kappa2, 1.0});
    EvolutionState st{0.0, row.tau, l2_project(space, pr.initial), 0};
    BackwardEuler be(sys);
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < row.steps; ++k)
    {
        const double t1 = T * (k + 1) / row.steps;
        EvolutionState next = be.step(st, row.tau, src.load(t1));
        if (rc.energy_check)
        {
            const double n0 = l2_norm(st.u), n1 = l2_norm(next.u);
            const double E = energy_norm(next.u, pr.params);
            double f2 = 0.0;
            const std::vector<double> &s = src.samples(t1);
            std::size_t i = 0;
            for (const ElementQuad &q : src.quad())
                for (double w : q.weights)
                {
                    f2 += w * s[i] * s[i];
                    ++i;
                }
            const double lhs = (n1 * n1 - n0 * n0) / (2 * row.tau) + gamma * E * E;
            const double rhs = 0.5 * f2 + (pr.params.kappa + 0.5) * n1 * n1;
            margin = std::min(margin, rhs - lhs);
        }
        next.t = t1;
        st = std::move(next);
    }
    if (rc.energy_check)
        row.energy_margin = margin;
    row.l2_error = l2_error(st.u, [&](const Point &x) { return uex(x, T); });
    return row;
}

} // namespace

std::vector<ConvergenceRow> run_convergence(const RunConfig &rc)
{
    std::vector<ConvergenceRow> rows(rc.levels.size());
    if (rc.jobs <= 1)
    {
        for (std::size_t i = 0; i < rc.levels.size(); ++i)
        {
            rows[i] = convergence_level(rc, rc.levels[i]);
            log_message(LogLevel::info, "level n=" + std::to_string(rc.levels[i]) + ": L2=" + num(rows[i].l2_error));
        }
    }
    else
    {
        // Independent levels; each builds its own problem, so nothing mutable is shared.
        std::size_t next = 0;
        while (next < rc.levels.size())
        {
            std::vector<std::future<ConvergenceRow>> batch;
            const std::size_t first = next;
            for (int j = 0; j < rc.jobs && next < rc.levels.size(); ++j, ++next)
                batch.push_back(std::async(std::launch::async, convergence_level, std::cref(rc), rc.levels[next]));
            for (std::size_t j = 0; j < batch.size(); ++j)
                rows[first + j] = batch[j].get();
        }
    }
    if (rows.size() >= 2)
    {
        std::vector<double> e, h;
        for (const auto &r : rows)
        {
            e.push_back(r.l2_error);
            h.push_back(r.h);
        }
        const std::vector<double> o = convergence_order(e, h);
        for (std::size_t i = 0; i < o.size(); ++i)
            rows[i + 1].order = o[i];
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Adaptive drivers

std::vector<StationaryIteration> run_adapt_stationary(const RunConfig &rc, Scheme scheme)
{
    const Problem pr = rc.make_problem();
    require(pr.stationary, ErrorKind::config_error, "adapt-stationary needs a stationary problem (ex3.1, ex3.2)");
    StationaryOptions opts;
    opts.degree = rc.degree;
    opts.exact_goal = rc.exact_goal;
    opts.compute_energy_error = rc.energy_error;
    AdaptConfig cfg = rc.adapt;
    return adapt_stationary(pr, rc.initial_mesh(rc.mesh_n), cfg, scheme, opts);
}

std::vector<Point> finest_centroids(const Mesh &mesh)
{
    const double hmin = mesh.h_min();
    std::vector<Point> out;
    for (int e = 0; e < mesh.num_elements(); ++e)
        if (mesh.diameter(e) <= hmin * (1.0 + 1e-9))
            out.push_back(mesh.centroid(e));
    return out;
}

EvolutionRun run_adapt_evolution(const RunConfig &rc)
{
    const Problem pr = rc.make_problem();
    require(!pr.stationary, ErrorKind::config_error, "adapt-evolution needs a time-dependent problem");
    EvolutionAdaptor ad(pr, rc.initial_mesh(rc.mesh_n), rc.degree, rc.adapt, rc.tau0);
    EvolutionRun run;
    std::vector<double> outs;
    for (double t : rc.output_times)
        if (t < pr.final_time)
            outs.push_back(t);
    run.records = ad.run(pr.final_time, outs, [&](const EvolutionRecord &, bool output) {
        if (!output)
            return;
        EvolutionSnapshot s;
        s.t = ad.time();
        s.mesh = ad.mesh();
        s.u = ad.solution();
        s.finest = finest_centroids(*s.mesh);
        run.snapshots.push_back(std::move(s));
    });
    return run;
}

// ---------------------------------------------------------------------------
// Tables

void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceRow> &rows)
{
    os << "n,K,dof,h,tau,steps,L2_error,order,energy_margin\n";
    for (const auto &r : rows)
        os << r.n << ',' << r.K << ',' << r.dof << ',' << num(r.h) << ',' << num(r.tau) << ',' << r.steps << ','
           << num(r.l2_error) << ',' << num(r.order) << ',' << num(r.energy_margin) << '\n';
}

void write_stationary_csv(std::ostream &os, const std::vector<StationaryIteration> &its)
{
    os << "iteration,K,dof,L2_error,energy_error,eta,I_eff\n";
    for (const auto &r : its)
        os << r.iteration << ',' << r.mesh->num_elements() << ',' << r.u.space().ndofs() << ',' << num(r.l2_error)
           << ',' << num(r.energy_error) << ',' << num(r.ind.total) << ',' << num(r.i_eff) << '\n';
}

void write_evolution_csv(std::ostream &os, const std::vector<EvolutionRecord> &recs)
{
    os << "step,t,tau,K,eta_time1,eta_time2,eta_space\n";
    for (const auto &r : recs)
        os << r.step << ',' << num(r.t) << ',' << num(r.tau) << ',' << r.K << ',' << num(r.eta_time1) << ','
           << num(r.eta_time2) << ',' << num(r.eta_space) << '\n';
}

// ---------------------------------------------------------------------------
// SVG

namespace
{

const char *const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string esc(const std::string &s)
{
    std::string o;
    for (char c : s)
    {
        if (c == '<')
            o += "&lt;";
        else if (c == '>')
            o += "&gt;";
        else if (c == '&')
            o += "&amp;";
        else
            o += c;
    }
    return o;
}

} // namespace

void write_loglog_svg(std::ostream &os, const std::string &title, const std::string &xlabel,
                      const std::string &ylabel, const std::vector<PlotSeries> &series, double ref_slope,
                      const std::string &ref_label)
{
    const double W = 640, H = 480, L = 80, R = 150, T = 40, B = 60;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto &s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.y[i]))
            {
                x0 = std::min(x0, std::log10(s.x[i]));
                x1 = std::max(x1, std::log10(s.x[i]));
                y0 = std::min(y0, std::log10(s.y[i]));
                y1 = std::max(y1, std::log10(s.y[i]));
            }
    if (x0 > x1)
    {
        x0 = 0;
        x1 = 1;
        y0 = 0;
        y1 = 1;
    }
    x0 = std::floor(x0);
    x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0);
    y1 = std::max(std::ceil(y1), y0 + 1);
    auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };

    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = int(x0); d <= int(x1); ++d)
        os << "<text x=\"" << px(d) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    for (int d = int(y0); d <= int(y1); ++d)
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << esc(xlabel)
       << "</text>\n";
    os << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << esc(ylabel) << "</text>\n";

    int legend = 0;
    auto legend_entry = [&](const std::string &label, const std::string &color, bool dashed) {
        const double ly = T + 16 + 18 * legend++;
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 34 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\"" << (dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
        os << "<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << esc(label) << "</text>\n";
    };
    for (std::size_t k = 0; k < series.size(); ++k)
    {
        const auto &s = series[k];
        const std::string color = palette[k % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.y[i]))
                os << px(std::log10(s.x[i])) << ',' << py(std::log10(s.y[i])) << ' ';
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.y[i]))
                os << "<circle cx=\"" << px(std::log10(s.x[i])) << "\" cy=\"" << py(std::log10(s.y[i]))
                   << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        legend_entry(s.label, color, false);
    }
    if (!ref_label.empty() && !series.empty() && !series[0].x.empty())
    {
        // Through the first point of the first series, clipped to the frame.
        const double ax = std::log10(series[0].x.front()), ay = std::log10(series[0].y.front());
        double bx = x1, by = ay + ref_slope * (x1 - ax);
        if (by < y0)
        {
            by = y0;
            bx = ax + (y0 - ay) / ref_slope;
        }
        os << "<line x1=\"" << px(ax) << "\" y1=\"" << py(ay) << "\" x2=\"" << px(bx) << "\" y2=\"" << py(by)
           << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
        legend_entry(ref_label, "gray", true);
    }
    os << "</svg>\n";
}

void write_mesh_svg(std::ostream &os, const Mesh &mesh, const std::string &title)
{
    const auto &bb = mesh.bbox();
    const double W = 520, pad = 30, top = 40;
    os << std::setprecision(7);
    if (mesh.dim() == 1)
    {
        const double H = 120;
        auto px = [&](double x) { return pad + (x - bb[0]) / (bb[1] - bb[0]) * (W - 2 * pad); };
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\">" << esc(title) << "</text>\n";
        os << "<line x1=\"" << px(bb[0]) << "\" y1=\"70\" x2=\"" << px(bb[1]) << "\" y2=\"70\" stroke=\"black\"/>\n";
        for (const Point &v : mesh.vertices())
            os << "<line x1=\"" << px(v[0]) << "\" y1=\"60\" x2=\"" << px(v[0]) << "\" y2=\"80\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
        os << "</svg>\n";
        return;
    }
    const double sx = (W - 2 * pad) / (bb[1] - bb[0]);
    const double H = top + pad + sx * (bb[3] - bb[2]);
    auto px = [&](const Point &p) { return std::pair{pad + (p[0] - bb[0]) * sx, H - pad - (p[1] - bb[2]) * sx}; };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\">" << esc(title) << "</text>\n";
    os << "<g fill=\"none\" stroke=\"black\" stroke-width=\"0.4\">\n";
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        os << "<polygon points=\"";
        for (int v : mesh.element(e))
        {
            const auto [x, y] = px(mesh.vertex(v));
            os << x << ',' << y << ' ';
        }
        os << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

// ---------------------------------------------------------------------------
// Experiments

int exit_code(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::config_error:
        return 3;
    case ErrorKind::input_error:
    case ErrorKind::invalid_input:
    case ErrorKind::invalid_order:
    case ErrorKind::out_of_domain:
    case ErrorKind::singular_point:
    case ErrorKind::non_integrable_kernel:
    case ErrorKind::degenerate_ray:
    case ErrorKind::undefined_index:
        return 4;
    case ErrorKind::solver_failure:
        return 5;
    case ErrorKind::adapt_abort:
        return 6;
    case ErrorKind::internal_error:
        return 7;
    }
    return 7;
}

namespace
{

std::ofstream open_out(const std::filesystem::path &p)
{
    std::ofstream f(p);
    if (!f)
        throw Error(ErrorKind::input_error, "cannot write '" + p.string() + "'");
    return f;
}

std::string tag(int i)
{
    std::ostringstream os;
    os << std::setw(3) << std::setfill('0') << i;
    return os.str();
}

nlohmann::json header_json(const RunConfig &rc, const std::string &mode)
{
    const Problem pr = rc.make_problem();
    nlohmann::json j;
    j["mode"] = mode;
    j["problem"] = rc.problem;
    j["dim"] = pr.dim;
    j["degree"] = rc.degree;
    j["alpha"] = rc.params.alpha;
    j["beta"] = rc.params.beta;
    j["lambda"] = rc.params.lambda;
    j["kappa1"] = rc.params.kappa1;
    j["kappa2"] = rc.params.kappa2;
    j["b"] = {rc.params.b[0], rc.params.b[1]};
    j["mesh_family"] = pr.dim == 1 ? "uniform intervals" : "structured right triangles (n x n squares, 2 per square)";
    return j;
}

void write_stationary_artifacts(const std::filesystem::path &dir, const std::string &label,
                                const std::vector<StationaryIteration> &its)
{
    {
        auto f = open_out(dir / ("stationary_" + label + ".csv"));
        write_stationary_csv(f, its);
    }
    for (const auto &r : its)
    {
        const std::string base = label + "_iter" + tag(r.iteration);
        {
            auto f = open_out(dir / ("mesh_" + base + ".txt"));
            r.mesh->write(f);
        }
        {
            auto f = open_out(dir / ("solution_" + base + ".txt"));
            r.u.dump(f);
        }
        {
            auto f = open_out(dir / ("mesh_" + base + ".svg"));
            write_mesh_svg(f, *r.mesh, label + " iteration " + std::to_string(r.iteration) + ", K = " +
                                           std::to_string(r.mesh->num_elements()));
        }
    }
}

} // namespace

int run_experiment(const std::string &mode, const RunConfig &rc, const std::string &out_dir)
{
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorKind::input_error, "cannot create output directory '" + out_dir + "'");
    nlohmann::json summary = header_json(rc, mode);

    if (mode == "converge")
    {
        const std::vector<ConvergenceRow> rows = run_convergence(rc);
        {
            auto f = open_out(dir / "convergence.csv");
            write_convergence_csv(f, rows);
        }
        PlotSeries s{"L2 error", {}, {}};
        std::vector<double> e, h;
        for (const auto &r : rows)
        {
            s.x.push_back(r.h);
            s.y.push_back(r.l2_error);
            e.push_back(r.l2_error);
            h.push_back(r.h);
        }
        {
            auto f = open_out(dir / "convergence.svg");
            write_loglog_svg(f, rc.problem + " convergence, N = " + std::to_string(rc.degree), "h", "L2 error", {s},
                             rc.degree + 1.0, "h^" + std::to_string(rc.degree + 1));
        }
        summary["levels"] = rc.levels;
        if (rows.size() >= 2)
            summary["fitted_order"] = fitted_order(e, h);
        double margin = std::numeric_limits<double>::infinity();
        for (const auto &r : rows)
            if (!std::isnan(r.energy_margin))
                margin = std::min(margin, r.energy_margin);
        if (std::isfinite(margin))
            summary["energy_margin_min"] = margin;
    }
    else if (mode == "adapt-stationary")
    {
        std::vector<Scheme> schemes{rc.scheme};
        std::vector<PlotSeries> series;
        for (Scheme sc : schemes)
        {
            const auto its = run_adapt_stationary(rc, sc);
            write_stationary_artifacts(dir, to_string(sc), its);
            PlotSeries s{to_string(sc), {}, {}};
            for (const auto &r : its)
            {
                s.x.push_back(r.mesh->num_elements());
                s.y.push_back(r.l2_error);
            }
            series.push_back(s);
            summary["iterations"][to_string(sc)] = its.size();
            summary["final_K"][to_string(sc)] = its.back().mesh->num_elements();
            summary["final_L2"][to_string(sc)] = its.back().l2_error;
        }
        auto f = open_out(dir / ("error_vs_K_" + std::string(to_string(rc.scheme)) + ".svg"));
        write_loglog_svg(f, rc.problem + " adaptive refinement", "number of elements", "L2 error", series, -2.0,
                         "N^-2");
    }
    else if (mode == "adapt-stationary-all")
    {
        std::vector<PlotSeries> series;
        for (Scheme sc : {Scheme::uniform, Scheme::energy, Scheme::dwr})
        {
            RunConfig r2 = rc;
            if (sc == Scheme::uniform)
                r2.adapt.max_iterations = std::min(rc.adapt.max_iterations, 6);
            const auto its = run_adapt_stationary(r2, sc);
            write_stationary_artifacts(dir, to_string(sc), its);
            PlotSeries s{to_string(sc), {}, {}};
            for (const auto &r : its)
            {
                s.x.push_back(r.mesh->num_elements());
                s.y.push_back(r.l2_error);
            }
            series.push_back(s);
            summary["final_K"][to_string(sc)] = its.back().mesh->num_elements();
            summary["final_L2"][to_string(sc)] = its.back().l2_error;
        }
        auto f = open_out(dir / "error_vs_K.svg");
        write_loglog_svg(f, rc.problem + " uniform vs adaptive", "number of elements", "L2 error", series, -2.0,
                         "N^-2");
    }
    else if (mode == "adapt-evolution")
    {
        const EvolutionRun run = run_adapt_evolution(rc);
        {
            auto f = open_out(dir / "evolution.csv");
            write_evolution_csv(f, run.records);
        }
        int k = 0;
        for (const auto &s : run.snapshots)
        {
            const std::string base = "t" + tag(++k);
            {
                auto f = open_out(dir / ("mesh_" + base + ".txt"));
                s.mesh->write(f);
            }
            {
                auto f = open_out(dir / ("solution_" + base + ".txt"));
                s.u.dump(f);
            }
            {
                auto f = open_out(dir / ("mesh_" + base + ".svg"));
                write_mesh_svg(f, *s.mesh, "t = " + num(s.t) + ", K = " + std::to_string(s.mesh->num_elements()));
            }
            nlohmann::json js;
            js["t"] = s.t;
            js["K"] = s.mesh->num_elements();
            js["h_min"] = s.mesh->h_min();
            for (const Point &c : s.finest)
                js["finest_centroids"].push_back({c[0], c[1]});
            summary["snapshots"].push_back(js);
        }
        int halvings = 0;
        for (const auto &r : run.records)
            halvings += r.halvings;
        summary["steps"] = run.records.size();
        summary["halvings"] = halvings;
    }
    else
    {
        throw Error(ErrorKind::config_error, "unknown mode '" + mode + "'");
    }

    auto f = open_out(dir / "summary.json");
    f << summary.dump(2) << '\n';
    return 0;
}

} // namespace tdg
