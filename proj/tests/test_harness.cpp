#include "tdg/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tdg;

namespace
{

template <class F>
ErrorKind kind_of(F &&f)
{
    try
    {
        f();
    }
    catch (const Error &e)
    {
        return e.kind();
    }
    return ErrorKind::internal_error;
}

Config parse(const std::string &text)
{
    std::istringstream is(text);
    return Config::parse(is);
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string &name)
{
    auto p = std::filesystem::temp_directory_path() / ("tdg_harness_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config parsing")
{
    const Config c = parse("# study\nproblem.id = ex2.1\nproblem.alpha=0.4   # order\n\nmesh.levels = 2, 4 ,8\n");
    CHECK(c.get_string("problem.id", "") == "ex2.1");
    CHECK(c.get_double("problem.alpha", 0.0) == 0.4);
    CHECK(c.get_ints("mesh.levels", {}) == std::vector<int>{2, 4, 8});
    CHECK(c.get_double("problem.beta", 0.7) == 0.7);

    CHECK(kind_of([] { parse("problem.id ex2.1\n"); }) == ErrorKind::config_error);
    CHECK(kind_of([] { parse("a = 1\na = 2\n"); }) == ErrorKind::config_error);
    CHECK(kind_of([] { parse("a =\n"); }) == ErrorKind::config_error);
    CHECK(kind_of([] { parse("a = x1").get_double("a", 0); }) == ErrorKind::config_error);
    CHECK(kind_of([] { parse("a = 1.5").get_int("a", 0); }) == ErrorKind::config_error);
    CHECK(kind_of([] { Config::load("/nonexistent/file.cfg"); }) == ErrorKind::config_error);
}

TEST_CASE("run configuration validation")
{
    const RunConfig rc = RunConfig::from_config(parse("problem.id = ex4\nadapt.theta1 = 0.3\n"));
    CHECK(rc.params.alpha == 0.8);
    CHECK(rc.params.kappa > 0.0);
    CHECK(rc.adapt.theta1 == 0.3);
    CHECK(rc.time_power == 2.0);

    for (const char *bad : {"problem.alpha = 1.0\n", "problem.lambda = -1\n", "adapt.theta1 = 1.2\n",
                            "problem.id = ex7\n", "problem.colour = red\n", "time.rule = bdf2\n",
                            "adapt.scheme = greedy\n", "dg.degree = 0\n", "time.output_times = 0.5, 2\n"})
        CHECK_MESSAGE(kind_of([&] { RunConfig::from_config(parse(bad)); }) == ErrorKind::config_error, bad);
}

TEST_CASE("convergence order examples")
{
    // h proportional to 1/sqrt(K).
    const auto h = [](double K) { return 1.0 / std::sqrt(K); };
    CHECK(convergence_order({4.46e-2, 1.52e-2}, {h(68), h(211)})[0] == doctest::Approx(1.90).epsilon(5e-3));
    CHECK(convergence_order({1.01e-2, 2.10e-3}, {h(68), h(211)})[0] == doctest::Approx(2.77).epsilon(5e-3));
    for (double p : {1.0, 2.5})
    {
        const auto o = convergence_order({3.0, 3.0 / std::pow(2.0, p), 3.0 / std::pow(4.0, p)}, {0.4, 0.2, 0.1});
        CHECK(o[0] == doctest::Approx(p));
        CHECK(o[1] == doctest::Approx(p));
        CHECK(fitted_order({3.0, 3.0 / std::pow(2.0, p), 3.0 / std::pow(4.0, p)}, {0.4, 0.2, 0.1}) ==
              doctest::Approx(p));
    }
    CHECK(kind_of([] { convergence_order({1e-2, 0.0}, {0.5, 0.25}); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { convergence_order({1e-2, -1e-3}, {0.5, 0.25}); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { convergence_order({1e-2}, {0.5}); }) == ErrorKind::invalid_input);
}

TEST_CASE("manufactured sources")
{
    SUBCASE("zero solution has zero source")
    {
        const Problem p = make_problem("zero", default_params("zero"));
        CHECK(p.source({0.3, 1.1}, 0.4) == 0.0);
    }
    SUBCASE("swapping axes and coefficients leaves the source unchanged")
    {
        TemperedParams a = default_params("ex2.1");
        a.alpha = a.beta = 0.6;
        a.lambda = 0.0;
        a.b[0] = a.b[1] = 0.0;
        TemperedParams b = a;
        std::swap(b.kappa1, b.kappa2);
        a.finalize();
        b.finalize();
        const Problem pa = make_problem("ex2.1", a);
        const Problem pb = make_problem("ex2.1", b);
        for (const Point x : {Point{0.3, 1.4}, Point{1.1, 0.2}})
            CHECK(pa.source(x, 0.3) == doctest::Approx(pb.source({x[1], x[0]}, 0.3)).epsilon(1e-10));
    }
}

TEST_CASE("tables carry the documented headers")
{
    std::ostringstream a, b, c;
    write_stationary_csv(a, {});
    write_evolution_csv(b, {});
    write_convergence_csv(c, {});
    CHECK(a.str() == "iteration,K,dof,L2_error,energy_error,eta,I_eff\n");
    CHECK(b.str() == "step,t,tau,K,eta_time1,eta_time2,eta_space\n");
    CHECK(c.str().rfind("n,K,dof,h,tau,steps,L2_error,order,energy_margin\n", 0) == 0);
}

TEST_CASE("plots")
{
    std::ostringstream os;
    write_loglog_svg(os, "t", "K", "err", {{"dwr", {8, 16, 32}, {1e-1, 3e-2, 8e-3}}}, -2.0, "N^-2");
    const std::string s = os.str();
    CHECK(s.find("<svg") == 0);
    CHECK(s.find("N^-2") != std::string::npos);
    CHECK(s.find("polyline") != std::string::npos);
    CHECK(s.find("stroke-dasharray") != std::string::npos);

    std::ostringstream m;
    write_mesh_svg(m, build_structured_tri_mesh(0, 2, 0, 2, 2, 2), "mesh");
    std::size_t polys = 0;
    for (std::size_t p = m.str().find("<polygon"); p != std::string::npos; p = m.str().find("<polygon", p + 1))
        ++polys;
    CHECK(polys == 8);
}

TEST_CASE("exit codes are distinct per failure class")
{
    const std::set<int> codes{exit_code(ErrorKind::config_error), exit_code(ErrorKind::invalid_input),
                              exit_code(ErrorKind::solver_failure), exit_code(ErrorKind::adapt_abort),
                              exit_code(ErrorKind::internal_error)};
    CHECK(codes.size() == 5);
    CHECK(codes.count(0) == 0);
    CHECK(codes.count(1) == 0);
}

TEST_CASE("finest centroids")
{
    const Mesh m = refine(build_structured_tri_mesh(0, 2, 0, 2, 2, 2), {0});
    const std::vector<Point> c = finest_centroids(m);
    REQUIRE(!c.empty());
    for (const Point &p : c)
        CHECK(std::hypot(p[0], p[1]) < 1.0);
}

TEST_CASE("convergence study writes identical artifacts on repeated runs")
{
    const RunConfig rc = RunConfig::from_config(parse("problem.id = poly1d\nmesh.levels = 4, 8, 16\n"));
    const auto d1 = scratch("conv1"), d2 = scratch("conv2");
    CHECK(run_experiment("converge", rc, d1.string()) == 0);
    RunConfig rc2 = rc;
    rc2.jobs = 2;
    CHECK(run_experiment("converge", rc2, d2.string()) == 0);
    const std::string a = slurp(d1 / "convergence.csv");
    CHECK(a == slurp(d2 / "convergence.csv"));
    CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
    CHECK(std::filesystem::exists(d1 / "convergence.svg"));

    const std::vector<ConvergenceRow> rows = run_convergence(rc);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].order > 1.6);
    CHECK(rows[0].steps == int(std::ceil(1.0 / (0.5 * 0.5) - 1e-9)));
}

TEST_CASE("adaptive stationary run artifacts")
{
    const RunConfig rc = RunConfig::from_config(
        parse("problem.id = ex3.1\nmesh.n = 8\nadapt.max_iterations = 3\nadapt.tol_space = 1e-12\nadapt.scheme = dwr\n"));
    const auto d1 = scratch("st1"), d2 = scratch("st2");
    CHECK(run_experiment("adapt-stationary", rc, d1.string()) == 0);
    CHECK(run_experiment("adapt-stationary", rc, d2.string()) == 0);
    const std::string csv = slurp(d1 / "stationary_dwr.csv");
    CHECK(csv == slurp(d2 / "stationary_dwr.csv"));
    std::istringstream lines(csv);
    std::string line;
    int n = 0;
    while (std::getline(lines, line))
        ++n;
    CHECK(n == 4);
    CHECK(std::filesystem::exists(d1 / "mesh_dwr_iter003.svg"));
    CHECK(std::filesystem::exists(d1 / "solution_dwr_iter001.txt"));
    CHECK(std::filesystem::exists(d1 / "error_vs_K_dwr.svg"));

    CHECK(kind_of([&] { run_experiment("adapt-evolution", rc, d1.string()); }) == ErrorKind::config_error);
    CHECK(kind_of([&] { run_experiment("sweep", rc, d1.string()); }) == ErrorKind::config_error);
}

TEST_CASE("adaptive evolution snapshots at output times")
{
    const RunConfig rc = RunConfig::from_config(
        parse("problem.id = ex4\nmesh.n = 4\nproblem.final_time = 0.2\ntime.output_times = 0.1, 0.2\n"
              "time.tau0 = 0.05\nadapt.tol_time = 1\nadapt.tol_space = 1\n"));
    const EvolutionRun run = run_adapt_evolution(rc);
    REQUIRE(run.snapshots.size() == 2);
    CHECK(run.snapshots[0].t == doctest::Approx(0.1));
    CHECK(run.snapshots[1].t == doctest::Approx(0.2));
    CHECK(run.records.back().t == doctest::Approx(0.2));
}
