// cvp: batch runner for the causal variational principle toolkit.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cvp/action.hpp"
#include "cvp/cli/config.hpp"
#include "cvp/cli/json_io.hpp"
#include "cvp/cli/pipeline.hpp"
#include "cvp/diagnostics.hpp"
#include "cvp/kernels.hpp"
#include "cvp/parallel.hpp"
#include "cvp/rng.hpp"

namespace fs = std::filesystem;
using namespace cvp;
using namespace cvp::cli;

namespace {

struct Shared {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
};

void add_shared(CLI::App* cmd, Shared& s) {
    cmd->add_option("config", s.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", s.sets, "override a config field, e.g. solver.qp_tolerance=1e-8")->take_all();
    cmd->add_option("--out", s.out, "output directory (overrides output.dir)");
}

ExperimentConfig load(const Shared& s) {
    ExperimentConfig cfg = load_config(s.config, s.sets);
    if (!s.out.empty()) cfg.output.dir = s.out;
    return cfg;
}

void ensure_dir(const fs::path& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw Error(ErrorKind::config_error, "cannot create " + d.string() + ": " + ec.message());
}

int cmd_run(const Shared& s) {
    const ExperimentConfig cfg = load(s);
    const RunOutcome out = run_pipeline(cfg);
    write_run_outputs(cfg, out);
    for (const auto& [name, v] : out.report.at("verdicts").items())
        std::cout << name << ": " << v.get<std::string>() << '\n';
    std::cout << "report: " << (cfg.output.dir / "report.json").string() << '\n';
    return out.exit_code;
}

int cmd_solve(const Shared& s, int level) {
    const ExperimentConfig cfg = load(s);
    const auto per_level = cfg.level_configs();
    if (level < 1 || level > static_cast<int>(per_level.size()))
        throw ConfigError("--level", "must be in 1.." + std::to_string(per_level.size()));
    const LevelSolution sol = solve_level(cfg.lagrangian(), per_level[static_cast<std::size_t>(level - 1)]);
    ensure_dir(cfg.output.dir);
    const auto tag = std::to_string(level);
    write_text(cfg.output.dir / ("solution_level_" + tag + ".json"), to_json(sol, true).dump(2) + "\n");
    write_text(cfg.output.dir / ("atoms_level_" + tag + ".csv"), atoms_csv(sol.measure));
    std::cout << "level " << level << ": " << sol.measure.size() << " atoms, s = " << format_number(sol.s_param)
              << ", support residual " << format_number(sol.el_report.support_residual) << ", exterior violation "
              << format_number(sol.el_report.exterior_violation) << (sol.converged ? "" : " (not converged)") << '\n';
    return sol.converged ? exit_ok : exit_check_failed;
}

int cmd_construct(const Shared& s) {
    const ExperimentConfig cfg = load(s);
    const TestSetFamily family =
        build_test_family(cfg.family.sample, cfg.family.radii, cfg.family.union_depth, cfg.family.max_members);
    const auto per_level = cfg.level_configs();
    const Construction c = run_construction(cfg.lagrangian(), per_level, family, cfg.family.tail_window);
    ensure_dir(cfg.output.dir);
    json levels = json::array();
    for (const auto& l : c.levels) {
        if (l.ok()) {
            levels.push_back(to_json(*l.solution, false));
            write_text(cfg.output.dir / ("atoms_level_" + std::to_string(l.level) + ".csv"), atoms_csv(l.solution->measure));
        } else {
            levels.push_back({{"level", l.level}, {"status", "failed"}, {"error", l.error}});
        }
    }
    json traces = json::array();
    for (const auto& t : c.traces) traces.push_back(to_json(t));
    const json doc = {{"levels", levels}, {"phi_table", to_json(c.phi)}, {"convergence_traces", traces},
                      {"family_members", family.members.size()}};
    write_text(cfg.output.dir / "construction.json", doc.dump(2) + "\n");
    write_text(cfg.output.dir / "phi_table.csv", phi_table_csv(c));
    write_text(cfg.output.dir / "convergence.csv", convergence_csv(c));
    const auto ok = c.successful().size();
    std::cout << ok << " of " << c.levels.size() << " levels solved, " << family.members.size() << " family members\n";
    return ok == c.levels.size() ? exit_ok : exit_check_failed;
}

int cmd_verify(const Shared& s, const std::string& solution_path, int trials, double tol) {
    const ExperimentConfig cfg = load(s);
    const LevelSolution sol = level_solution_from_json(load_json_file(solution_path), cfg.space);
    const ELReport el = el_residual(cfg.lagrangian(), sol.measure, sol.candidate_grid, sol.s_param);
    const MinimalityReport m = verify_minimality(cfg.lagrangian(), sol, trials, cfg.space.seed);
    const bool pass = el.support_residual <= tol && el.exterior_violation <= tol && m.min_delta >= -1e-8;
    ensure_dir(cfg.output.dir);
    const json doc = {{"el_report", to_json(el)}, {"minimality", to_json(m)}, {"tol", tol}, {"verdict", pass ? "pass" : "fail"}};
    write_text(cfg.output.dir / ("verify_level_" + std::to_string(sol.level) + ".json"), doc.dump(2) + "\n");
    std::cout << "support residual " << format_number(el.support_residual) << ", exterior violation "
              << format_number(el.exterior_violation) << ", min delta " << format_number(m.min_delta) << " over "
              << m.trials << " variations: " << (pass ? "pass" : "fail") << '\n';
    return pass ? exit_ok : exit_check_failed;
}

int cmd_entropy(const std::vector<double>& center, double radius, const std::vector<double>& deltas, int budget,
                std::uint64_t seed, const std::string& out) {
    if (center.empty()) throw ConfigError("--center", "needs at least one coordinate");
    if (!(radius >= 0.0)) throw ConfigError("--radius", "must be nonnegative");
    TestSet k;
    k.balls.push_back(Ball{Point(1, center, static_cast<int>(center.size())), radius, 1});
    std::ostringstream csv;
    csv << "delta,estimate\n";
    for (double d : deltas) {
        if (!(d > 0.0)) throw ConfigError("--delta", "must be positive");
        const int e = entropy_estimate(k, d, budget, seed);
        csv << format_number(d) << ',' << e << '\n';
    }
    std::cout << csv.str();
    if (!out.empty()) {
        ensure_dir(out);
        write_text(fs::path(out) / "entropy.csv", csv.str());
    }
    return exit_ok;
}

std::vector<Point> read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    std::vector<Point> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> c;
        std::stringstream ss(line);
        std::string cell;
        try {
            while (std::getline(ss, cell, ',')) c.push_back(std::stod(cell));
        } catch (const std::exception&) {
            if (pts.empty() && lineno == 1) continue;  // header
            throw ConfigError(path + ":" + std::to_string(lineno), "expected comma-separated numbers");
        }
        pts.push_back(Point::euclidean(1, std::move(c)));
    }
    return pts;
}

std::vector<Point> generate_cloud(const std::string& shape, int count, std::uint64_t seed) {
    Rng rng = stream(seed, "dim/" + shape);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < count; ++i) {
        if (shape == "segment")
            pts.push_back(Point::euclidean(1, {u(rng), 0.0}));
        else if (shape == "square")
            pts.push_back(Point::euclidean(1, {u(rng), u(rng)}));
        else if (shape == "cube")
            pts.push_back(Point::euclidean(1, {u(rng), u(rng), u(rng)}));
        else
            throw ConfigError("--generate", "expected segment, square or cube");
    }
    return pts;
}

int cmd_dim(const std::string& points_path, const std::string& shape, int count, std::uint64_t seed,
            const std::vector<double>& radii, const std::vector<double>& expect, const std::string& out) {
    const std::vector<Point> pts = points_path.empty() ? generate_cloud(shape, count, seed) : read_points_csv(points_path);
    const DimensionReport r = estimate_dimension(pts, radii);
    bool pass = true;
    if (!expect.empty()) {
        if (expect.size() != 2) throw ConfigError("--expect", "expected lo,hi");
        pass = r.global_estimate >= expect[0] && r.global_estimate <= expect[1];
    }
    if (!out.empty()) {
        ensure_dir(out);
        write_text(fs::path(out) / "dimension.csv", dimension_csv(&r));
        write_text(fs::path(out) / "dimension.json", to_json(r, false).dump(2) + "\n");
    }
    std::cout << "points " << pts.size() << ", estimate " << format_number(r.global_estimate) << ", fit R^2 "
              << format_number(r.fit_quality) << (expect.empty() ? "" : (pass ? ", within band" : ", outside band")) << '\n';
    return pass ? exit_ok : exit_check_failed;
}

int cmd_closure(int s, int n, int trials, std::uint64_t seed, const std::string& out) {
    const ClosureReport r = closure_test(s, n, trials, seed);
    if (!out.empty()) {
        ensure_dir(out);
        write_text(fs::path(out) / "closure.json", to_json(r).dump(2) + "\n");
    }
    std::cout << "s = " << s << ", N = " << n << ": " << r.violations << " violations in " << r.trials
              << " trials, max tail step " << format_number(r.max_tail_step) << '\n';
    return r.violations == 0 ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-resolution experiments for the causal variational principle"};
    app.require_subcommand(1);
    std::size_t workers = 0;
    app.add_option("--workers", workers, "worker threads (default: CVP_WORKERS or 1)");

    Shared run_s, solve_s, construct_s, verify_s;
    auto* run = app.add_subcommand("run", "full pipeline: solve all levels, construct, run enabled checks");
    add_shared(run, run_s);

    auto* solve = app.add_subcommand("solve", "solve a single level");
    add_shared(solve, solve_s);
    int solve_level_arg = 1;
    solve->add_option("--level", solve_level_arg, "level to solve")->default_val(1);

    auto* construct = app.add_subcommand("construct", "solve all levels and tabulate the set function");
    add_shared(construct, construct_s);

    auto* verify = app.add_subcommand("verify", "EL residual and minimality of a serialized solution");
    add_shared(verify, verify_s);
    std::string solution_path;
    int verify_trials = 200;
    double verify_tol = 1e-5;
    verify->add_option("--solution", solution_path, "solution_level_k.json written by solve")->required()->check(CLI::ExistingFile);
    verify->add_option("--trials", verify_trials, "random variations")->default_val(200)->check(CLI::PositiveNumber);
    verify->add_option("--tol", verify_tol, "EL threshold")->default_val(1e-5);

    auto* entropy = app.add_subcommand("entropy", "covering-number estimates of a ball over a delta sweep");
    std::vector<double> center, deltas;
    double radius = 1.0;
    int budget = 64;
    std::uint64_t entropy_seed = 0;
    std::string entropy_out;
    entropy->add_option("--center", center, "ball center coordinates")->required()->delimiter(',');
    entropy->add_option("--radius", radius, "ball radius")->required();
    entropy->add_option("--delta", deltas, "cover radii")->required()->delimiter(',');
    entropy->add_option("--budget", budget, "sample points")->default_val(64)->check(CLI::PositiveNumber);
    entropy->add_option("--seed", entropy_seed, "seed")->default_val(0);
    entropy->add_option("--out", entropy_out, "directory for entropy.csv");

    auto* dim = app.add_subcommand("dim", "correlation-sum dimension estimate of a point cloud");
    std::string points_path, shape = "segment";
    int count = 10000;
    std::uint64_t dim_seed = 0;
    std::vector<double> radii{0.002, 0.004, 0.008, 0.016, 0.032}, expect;
    std::string dim_out;
    auto* pts_opt = dim->add_option("--points", points_path, "CSV of coordinates, one point per line");
    dim->add_option("--generate", shape, "segment, square or cube")->excludes(pts_opt);
    dim->add_option("--count", count, "generated points")->default_val(10000)->check(CLI::PositiveNumber);
    dim->add_option("--seed", dim_seed, "seed")->default_val(0);
    dim->add_option("--radii", radii, "radii, spanning at least a decade")->delimiter(',');
    dim->add_option("--expect", expect, "pass band lo,hi for the estimate")->delimiter(',');
    dim->add_option("--out", dim_out, "directory for dimension.csv");

    auto* closure = app.add_subcommand("closure", "signature closure test on Cauchy sequences");
    int cs = 1, cn = 8, ctrials = 100;
    std::uint64_t cseed = 0;
    std::string closure_out;
    closure->add_option("--s", cs, "spin dimension")->default_val(1);
    closure->add_option("--N", cn, "Hilbert truncation")->default_val(8);
    closure->add_option("--trials", ctrials, "trials")->default_val(100);
    closure->add_option("--seed", cseed, "seed")->default_val(0);
    closure->add_option("--out", closure_out, "directory for closure.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_error;
    }
    if (workers > 0) set_worker_count(workers);

    try {
        if (*run) return cmd_run(run_s);
        if (*solve) return cmd_solve(solve_s, solve_level_arg);
        if (*construct) return cmd_construct(construct_s);
        if (*verify) return cmd_verify(verify_s, solution_path, verify_trials, verify_tol);
        if (*entropy) return cmd_entropy(center, radius, deltas, budget, entropy_seed, entropy_out);
        if (*dim) return cmd_dim(points_path, shape, count, dim_seed, radii, expect, dim_out);
        if (*closure) return cmd_closure(cs, cn, ctrials, cseed, closure_out);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
