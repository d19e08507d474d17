// Command-line driver: convergence studies, stationary and evolution adaptivity, and the
// property suite.

#include "tdg/harness.hpp"
#include "tdg/log.hpp"

#include "support/property_suite.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace
{

int run_validate(std::uint64_t seed)
{
    std::vector<suite::Check> checks = suite::calculus_suite(seed);
    checks.push_back(suite::upwind_identity(seed));
    checks.push_back(suite::inverse_inequality(seed));
    bool ok = true;
    for (const auto &c : checks)
    {
        std::cout << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(30) << c.name << " value=" << std::setprecision(4)
                  << c.value << " tol=" << c.tol << '\n';
        ok = ok && c.pass;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Tempered fractional DG solver with adaptive refinement"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir = "out";
    int jobs = 0;
    std::uint64_t seed = 20240601;
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--jobs", jobs, "Parallel mesh levels in convergence studies")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed of the randomized property checks");

    std::string config_path;
    std::vector<std::string> overrides;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("config", config_path, "key = value configuration file")->required();
        sub->add_option("--set", overrides, "Override a key, e.g. --set problem.alpha=0.4");
    };
    CLI::App *converge = app.add_subcommand("converge", "Convergence study over mesh.levels");
    add_common(converge);
    CLI::App *stat = app.add_subcommand("adapt-stationary", "Adaptive refinement of a stationary example");
    add_common(stat);
    std::string scheme;
    stat->add_option("--scheme", scheme, "energy | dwr | uniform | all")
        ->check(CLI::IsMember({"energy", "dwr", "uniform", "all"}));
    CLI::App *evo = app.add_subcommand("adapt-evolution", "Adaptive time stepping and mesh adaptation");
    add_common(evo);
    CLI::App *val = app.add_subcommand("validate", "Property suite of the calculus and assembly");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (val->parsed())
            return run_validate(seed);

        tdg::Config cfg = tdg::Config::load(config_path);
        for (const std::string &kv : overrides)
        {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw tdg::Error(tdg::ErrorKind::config_error, "--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!scheme.empty() && scheme != "all")
            cfg.set("adapt.scheme", scheme);
        if (jobs > 0)
            cfg.set("run.jobs", std::to_string(jobs));
        const tdg::RunConfig rc = tdg::RunConfig::from_config(cfg);

        std::string mode = converge->parsed() ? "converge" : stat->parsed() ? "adapt-stationary" : "adapt-evolution";
        if (mode == "adapt-stationary" && scheme == "all")
            mode = "adapt-stationary-all";
        const int code = tdg::run_experiment(mode, rc, out_dir);
        std::cout << "wrote " << out_dir << '\n';
        return code;
    }
    catch (const tdg::Error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return tdg::exit_code(e.kind());
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return tdg::exit_code(tdg::ErrorKind::internal_error);
    }
}
