#include "cvp/cli/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvp/action.hpp"
#include "cvp/cli/json_io.hpp"
#include "cvp/diagnostics.hpp"
#include "cvp/parallel.hpp"

namespace cvp::cli {
namespace {

constexpr double kMinimalityFloor = -1e-8;

json verdict(bool pass) { return pass ? "pass" : "fail"; }

json disabled() { return {{"verdict", "disabled"}}; }

json kernel_summary(const LagrangianKernel& k) {
    json j = {{"kind", std::string(to_string(k.kind()))}, {"c", k.diagonal_bound()}};
    j["R"] = k.range_radius() ? json(*k.range_radius()) : json(nullptr);
    j["bound"] = k.bound() ? json(*k.bound()) : json(nullptr);
    if (k.kind() == KernelKind::entropy_vanishing) j["exhaustion_entropy"] = k.exhaustion_entropy();
    return j;
}

std::vector<Point> spread_sample(const std::vector<Point>& pts, std::size_t n) {
    if (pts.size() <= n) return pts;
    std::vector<Point> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pts[i * pts.size() / n]);
    return out;
}

}  // namespace

RunOutcome run_pipeline(const ExperimentConfig& cfg) {
    RunOutcome out;
    const LagrangianKernel& k = cfg.lagrangian();
    const auto per_level = cfg.level_configs();

    json& rep = out.report;
    rep["format"] = "cvp-report/1";
    rep["config"] = cfg.source;
    rep["kernel"] = kernel_summary(k);

    out.levels.resize(per_level.size());
    parallel_for(per_level.size(), [&](std::size_t i) {
        out.levels[i].level = per_level[i].level;
        try {
            out.levels[i].solution = solve_level(k, per_level[i]);
        } catch (const std::exception& e) {
            out.levels[i].error = e.what();
        }
    });

    json levels = json::array();
    std::vector<LevelSolution> solved;
    bool all_converged = true;
    for (std::size_t i = 0; i < out.levels.size(); ++i) {
        const auto& l = out.levels[i];
        if (l.ok()) {
            json j = to_json(*l.solution, false);
            j["status"] = "ok";
            j["candidate_grid_size"] = l.solution->candidate_grid.size();
            levels.push_back(j);
            solved.push_back(*l.solution);
            all_converged = all_converged && l.solution->converged;
        } else {
            levels.push_back({{"level", l.level}, {"status", "failed"}, {"error", l.error}});
            all_converged = false;
        }
    }
    rep["levels"] = levels;

    TestSetFamily family = build_test_family(cfg.family.sample, cfg.family.radii, cfg.family.union_depth,
                                             cfg.family.max_members);
    rep["family"] = to_json(family);
    rep["family"]["member_count"] = family.members.size();
    rep["family"]["sample_size"] = family.dense_sample.size();

    json checks = json::object();
    checks["levels_converged"] = {{"verdict", verdict(all_converged)},
                                  {"solved", solved.size()},
                                  {"requested", per_level.size()}};
    try {
        out.construction = assemble_construction(out.levels, family, cfg.family.tail_window);
    } catch (const Error& e) {
        rep["construction_error"] = e.what();
    }

    if (out.construction) {
        const Construction& c = *out.construction;
        rep["phi_table"] = to_json(c.phi);
        json traces = json::array();
        for (const auto& t : c.traces) traces.push_back(to_json(t));
        rep["convergence_traces"] = traces;
    } else {
        rep["phi_table"] = nullptr;
        rep["convergence_traces"] = json::array();
    }
    const Construction* c = out.construction ? &*out.construction : nullptr;
    const std::vector<Point>& top_grid = cfg.grids.back();

    // Every named check appears with a verdict; those that need the construction fail without it.
    auto needs_construction = [&](json& slot) {
        if (c) return true;
        slot = {{"verdict", "fail"}, {"error", "construction unavailable"}};
        return false;
    };

    if (cfg.checks.euler_lagrange_tol) {
        const double tol = *cfg.checks.euler_lagrange_tol;
        bool pass = !solved.empty();
        json per = json::array();
        for (const auto& s : solved) {
            const bool ok = s.el_report.support_residual <= tol && s.el_report.exterior_violation <= tol;
            pass = pass && ok;
            per.push_back({{"level", s.level},
                           {"support_residual", s.el_report.support_residual},
                           {"exterior_violation", s.el_report.exterior_violation},
                           {"pass", ok}});
        }
        checks["euler_lagrange"] = {{"verdict", verdict(pass)}, {"tol", tol}, {"levels", per}};
    } else {
        checks["euler_lagrange"] = disabled();
    }

    if (!cfg.checks.phi_properties) {
        checks["phi_properties"] = disabled();
    } else if (needs_construction(checks["phi_properties"])) {
        const PhiCheck pc = check_phi_properties(c->phi, family);
        json j = to_json(pc);
        j["verdict"] = verdict(pc.violations.empty());
        checks["phi_properties"] = j;
    }

    if (!cfg.checks.condition_b_eps) {
        checks["condition_B"] = disabled();
    } else if (needs_construction(checks["condition_B"])) {
        const ConditionBReport b = check_condition_B(c->final_measure(), cfg.checks.condition_b_set, *cfg.checks.condition_b_eps);
        json j = to_json(b);
        j["verdict"] = verdict(b.satisfied_at.has_value());
        checks["condition_B"] = j;
    }

    if (!cfg.checks.condition_iv) {
        checks["condition_iv"] = disabled();
    } else if (needs_construction(checks["condition_iv"])) {
        std::vector<Point> probes;
        for (const auto& p : top_grid) probes.push_back(lift(p, c->max_level));
        const double bound = check_condition_iv(k, c->final_measure(), probes);
        checks["condition_iv"] = {{"verdict", verdict(std::isfinite(bound))},
                                  {"sup_potential_lower_bound", number(bound)},
                                  {"probe_count", probes.size()}};
    }

    if (!cfg.checks.minimality_trials) {
        checks["minimality"] = disabled();
    } else {
        bool pass = !solved.empty();
        json per = json::array();
        for (const auto& s : solved) {
            const MinimalityReport m = verify_minimality(k, s, *cfg.checks.minimality_trials, cfg.space.seed);
            json j = to_json(m);
            j["level"] = s.level;
            pass = pass && m.min_delta >= kMinimalityFloor;
            per.push_back(j);
        }
        checks["minimality"] = {{"verdict", verdict(pass)}, {"threshold", kMinimalityFloor}, {"levels", per}};
    }

    if (!cfg.checks.closure) {
        checks["closure"] = disabled();
    } else {
        const auto& cl = *cfg.checks.closure;
        const ClosureReport r = closure_test(cl.s, cl.n, cl.trials, cfg.space.seed);
        json j = to_json(r);
        j["verdict"] = verdict(r.violations == 0);
        checks["closure"] = j;
    }

    if (!cfg.checks.dimension) {
        checks["dimension"] = disabled();
    } else {
        const auto& d = *cfg.checks.dimension;
        std::vector<Point> pts;
        if (!d.from_support)
            pts = top_grid;
        else if (c)
            pts = support(c->final_measure());
        try {
            out.dimension = estimate_dimension(pts, d.radii);
            json j = to_json(*out.dimension, false);
            j["source"] = d.from_support ? "support" : "grid";
            j["point_count"] = pts.size();
            j["verdict"] = "pass";
            checks["dimension"] = j;
        } catch (const Error& e) {
            checks["dimension"] = {{"verdict", "fail"}, {"error", e.what()}, {"point_count", pts.size()}};
        }
    }

    if (!cfg.checks.nontriviality_floor) {
        checks["nontriviality"] = disabled();
    } else if (solved.empty()) {
        checks["nontriviality"] = {{"verdict", "fail"}, {"error", "no solved level"}};
    } else {
        const NontrivialityVerdict v = check_nontriviality(solved, family, *cfg.checks.nontriviality_floor, &k);
        json j = to_json(v);
        j["verdict"] = verdict(v.nontrivial);
        checks["nontriviality"] = j;
    }

    if (!cfg.checks.kernel_class_sample) {
        checks["kernel_class"] = disabled();
    } else {
        const auto sample = spread_sample(top_grid, static_cast<std::size_t>(*cfg.checks.kernel_class_sample));
        const ClassReport r = check_kernel_class(k, sample);
        json j = to_json(r);
        j["verdict"] = verdict(r.passed());
        checks["kernel_class"] = j;
    }

    if (cfg.checks.mu_regions.empty()) {
        rep["mu_samples"] = "disabled";
    } else if (c) {
        json mu = json::array();
        for (const auto& u : cfg.checks.mu_regions) {
            const SetValue v = mu_hat(c->phi, family, u);
            mu.push_back({{"mu_hat", v.value},
                          {"witness", v.witness ? json(*v.witness) : json(nullptr)},
                          {"final_measure_of_region", measure_of(c->final_measure(), u)}});
        }
        rep["mu_samples"] = mu;
    } else {
        rep["mu_samples"] = json::array();
    }

    bool failed = false;
    json verdicts = json::object();
    for (const auto& [name, j] : checks.items()) {
        verdicts[name] = j.at("verdict");
        failed = failed || j.at("verdict") == "fail";
    }
    rep["checks"] = checks;
    rep["verdicts"] = verdicts;
    out.exit_code = failed ? exit_check_failed : exit_ok;
    rep["exit_code"] = out.exit_code;
    return out;
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string atoms_csv(const DiscreteMeasure& m) {
    std::ostringstream os;
    std::size_t width = 0;
    bool euclid = true;
    for (const auto& a : m.atoms()) {
        euclid = a.point.realization() == Realization::euclidean;
        width = std::max(width, euclid ? a.point.coords().size() : static_cast<std::size_t>(a.point.op().rank()));
    }
    os << "index,level,intrinsic_level,weight";
    for (std::size_t i = 0; i < width; ++i) os << (euclid ? ",x" : ",eig") << i;
    os << '\n';
    for (std::size_t i = 0; i < m.atoms().size(); ++i) {
        const auto& a = m.atoms()[i];
        os << i << ',' << a.point.level() << ',' << a.point.intrinsic_level() << ',' << format_number(a.weight);
        std::vector<double> vals;
        if (euclid)
            vals = a.point.coords();
        else
            vals.assign(a.point.op().eigenvalues().begin(), a.point.op().eigenvalues().end());
        for (std::size_t j = 0; j < width; ++j) os << ',' << (j < vals.size() ? format_number(vals[j]) : "");
        os << '\n';
    }
    return os.str();
}

std::string phi_table_csv(const Construction& c) {
    std::ostringstream os;
    os << "level,member_id,measure,phi_hat,tail_osc,stabilized\n";
    for (std::size_t k = 0; k < c.phi.levels.size(); ++k)
        for (const auto& r : c.phi.rows)
            os << c.phi.levels[k] << ',' << r.member_id << ',' << format_number(r.sequence[k]) << ','
               << format_number(r.phi_hat) << ',' << format_number(r.tail_osc) << ',' << (r.stabilized ? 1 : 0) << '\n';
    return os.str();
}

std::string convergence_csv(const Construction& c) {
    std::ostringstream os;
    os << "member_id,from_level,to_level,bl_lower_bound\n";
    for (const auto& t : c.traces)
        for (std::size_t i = 0; i < t.discrepancy.size(); ++i)
            os << t.member_id << ',' << t.from_level[i] << ',' << t.to_level[i] << ',' << format_number(t.discrepancy[i]) << '\n';
    return os.str();
}

std::string dimension_csv(const DimensionReport* r) {
    std::ostringstream os;
    os << "radius,pair_count,correlation_sum\n";
    if (r)
        for (std::size_t i = 0; i < r->radii_used.size(); ++i)
            os << format_number(r->radii_used[i]) << ',' << r->pair_counts[i] << ',' << format_number(r->correlation_sums[i]) << '\n';
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::config_error, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorKind::config_error, "write failed for " + path.string());
}

void write_run_outputs(const ExperimentConfig& cfg, const RunOutcome& out) {
    const auto& dir = cfg.output.dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::config_error, "cannot create output directory " + dir.string() + ": " + ec.message());
    if (cfg.output.json) write_text(dir / "report.json", out.report.dump(2) + "\n");
    if (!cfg.output.csv) return;
    for (const auto& l : out.levels)
        if (l.ok()) write_text(dir / ("atoms_level_" + std::to_string(l.level) + ".csv"), atoms_csv(l.solution->measure));
    if (out.construction) {
        write_text(dir / "phi_table.csv", phi_table_csv(*out.construction));
        write_text(dir / "convergence.csv", convergence_csv(*out.construction));
    } else {
        write_text(dir / "phi_table.csv", "level,member_id,measure,phi_hat,tail_osc,stabilized\n");
        write_text(dir / "convergence.csv", "member_id,from_level,to_level,bl_lower_bound\n");
    }
    write_text(dir / "dimension.csv", dimension_csv(out.dimension ? &*out.dimension : nullptr));
}

}  // namespace cvp::cli
