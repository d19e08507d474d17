#pragma once

#include "tdg/adapt.hpp"
#include "tdg/error.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tdg
{

/// Flat "key = value" configuration with dotted section prefixes; '#' starts a comment.
class Config
{
public:
    static Config parse(std::istream &is, const std::string &source = "<config>");
    static Config load(const std::string &path);

    void set(const std::string &key, const std::string &value);
    bool has(const std::string &key) const { return values_.count(key) > 0; }
    std::string get_string(const std::string &key, const std::string &def) const;
    double get_double(const std::string &key, double def) const;
    int get_int(const std::string &key, int def) const;
    bool get_bool(const std::string &key, bool def) const;
    /// Comma-separated list.
    std::vector<double> get_doubles(const std::string &key, const std::vector<double> &def) const;
    std::vector<int> get_ints(const std::string &key, const std::vector<int> &def) const;
    /// config_error naming the first key outside the allowed set.
    void require_known(const std::set<std::string> &allowed) const;
    const std::map<std::string, std::string> &entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct RunConfig
{
    std::string problem = "ex2.1";
    TemperedParams params;
    double final_time = 1.0;
    int degree = 1;
    /// Mesh resolution: n x n squares (two triangles each) in 2D, n intervals in 1D.
    int mesh_n = 4;
    std::string mesh_file;
    /// Resolutions of a convergence study.
    std::vector<int> levels{4, 8, 16};
    /// "power": tau = h^p with p = time_power (default N+1); "fixed": tau = time_tau.
    std::string time_rule = "power";
    double time_power = -1.0;
    double time_tau = 0.01;
    /// Track the per-step discrete energy inequality in convergence studies.
    bool energy_check = false;
    AdaptConfig adapt;
    Scheme scheme = Scheme::energy;
    bool exact_goal = false;
    bool energy_error = true;
    double tau0 = 0.02;
    std::vector<double> output_times{0.25, 0.5, 0.75, 1.0};
    int jobs = 1;

    /// All keys accepted by from_config.
    static const std::set<std::string> &keys();
    /// Problem defaults overridden by the configuration; config_error on bad values.
    static RunConfig from_config(const Config &cfg);
    Problem make_problem() const;
    std::shared_ptr<const Mesh> initial_mesh(int n) const;
};

/// Pairwise orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}); invalid_input for nonpositive errors.
std::vector<double> convergence_order(const std::vector<double> &errors, const std::vector<double> &h);
/// Least-squares slope of log(errors) against log(h).
double fitted_order(const std::vector<double> &errors, const std::vector<double> &h);

struct ConvergenceRow
{
    int n = 0;
    int K = 0;
    int dof = 0;
    double h = 0.0;
    double tau = 0.0;
    int steps = 0;
    double l2_error = 0.0;
    double order = std::nan("");
    /// min over steps of rhs - lhs of the discrete energy inequality (nan when not tracked).
    double energy_margin = std::nan("");
};

/// Backward Euler (or a single stationary solve) on every level of the study.
std::vector<ConvergenceRow> run_convergence(const RunConfig &rc);

struct EvolutionSnapshot
{
    double t = 0.0;
    std::shared_ptr<const Mesh> mesh;
    DgFunction u;
    /// Centroids of all elements of minimum diameter.
    std::vector<Point> finest;
};

struct EvolutionRun
{
    std::vector<EvolutionRecord> records;
    std::vector<EvolutionSnapshot> snapshots;
};

std::vector<StationaryIteration> run_adapt_stationary(const RunConfig &rc, Scheme scheme);
EvolutionRun run_adapt_evolution(const RunConfig &rc);

/// Centroids of the elements whose diameter equals the minimum (relative slack 1e-9).
std::vector<Point> finest_centroids(const Mesh &mesh);

void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceRow> &rows);
void write_stationary_csv(std::ostream &os, const std::vector<StationaryIteration> &its);
void write_evolution_csv(std::ostream &os, const std::vector<EvolutionRecord> &recs);

struct PlotSeries
{
    std::string label;
    std::vector<double> x, y;
};

/// Log-log plot; a reference line of the given slope is drawn through the first point of the
/// first series when ref_label is non-empty.
void write_loglog_svg(std::ostream &os, const std::string &title, const std::string &xlabel,
                      const std::string &ylabel, const std::vector<PlotSeries> &series, double ref_slope = 0.0,
                      const std::string &ref_label = "");
/// Wireframe of a mesh (1D meshes as ticks on a line).
void write_mesh_svg(std::ostream &os, const Mesh &mesh, const std::string &title);

/// Process exit code of an error kind; 0 is success and 1 a failed check.
int exit_code(ErrorKind kind);

/// Runs a mode ("converge", "adapt-stationary", "adapt-evolution") and writes its artifacts
/// into out_dir. Returns the process exit code.
int run_experiment(const std::string &mode, const RunConfig &rc, const std::string &out_dir);

} // namespace tdg
