#include "cvp/cli/json_io.hpp"

#include <cmath>

namespace cvp::cli {
namespace {

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

template <class T>
json optional_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json to_json(const Point& p) {
    json j;
    j["level"] = p.level();
    if (p.realization() == Realization::euclidean) {
        j["coords"] = numbers(p.coords());
        return j;
    }
    const auto& op = p.op();
    j["eigenvalues"] = numbers(std::vector<double>(op.eigenvalues().begin(), op.eigenvalues().end()));
    json frame = json::array();
    for (Eigen::Index r = 0; r < op.frame().rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < op.frame().cols(); ++c) row.push_back({op.frame()(r, c).real(), op.frame()(r, c).imag()});
        frame.push_back(row);
    }
    j["frame"] = frame;
    return j;
}

json to_json(const DiscreteMeasure& m) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) atoms.push_back({{"point", to_json(a.point)}, {"weight", a.weight}});
    return {{"level", m.level()}, {"total_volume", m.total_volume()}, {"atoms", atoms}};
}

json to_json(const TestSet& s) {
    json balls = json::array();
    for (const auto& b : s.balls) balls.push_back({{"center", to_json(b.center)}, {"radius", b.radius}, {"level", b.level}});
    return {{"id", s.id}, {"balls", balls}};
}

json to_json(const TestSetFamily& f) {
    json members = json::array();
    for (const auto& m : f.members) members.push_back(to_json(m));
    return {{"radii", numbers(f.radii)}, {"union_depth", f.union_depth}, {"members", members}};
}

json to_json(const ELReport& r) {
    return {{"s_param", r.s_param},
            {"support_residual", r.support_residual},
            {"exterior_violation", r.exterior_violation},
            {"probe_count", r.probe_count},
            {"worst_probe", r.worst_probe},
            {"min_probe_ell", r.min_probe_ell}};
}

json to_json(const LevelSolution& s, bool with_grid) {
    json j = {{"level", s.level},
              {"s_param", s.s_param},
              {"lambda", s.lambda},
              {"action", s.action_value},
              {"iterations", s.iterations},
              {"converged", s.converged},
              {"qp_tolerance", s.qp_tolerance},
              {"insertion_tolerance", s.insertion_tolerance},
              {"action_history", numbers(s.action_history)},
              {"el_report", to_json(s.el_report)},
              {"warnings", s.warnings},
              {"measure", to_json(s.measure)}};
    if (with_grid) {
        json g = json::array();
        for (const auto& p : s.candidate_grid) g.push_back(to_json(p));
        j["candidate_grid"] = g;
    }
    return j;
}

json to_json(const PhiTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"member_id", r.member_id},
                        {"sequence", numbers(r.sequence)},
                        {"phi_hat", r.phi_hat},
                        {"tail_osc", r.tail_osc},
                        {"c_k_bound", r.c_k_bound},
                        {"stabilized", r.stabilized}});
    return {{"levels", t.levels}, {"tail_window", t.tail_window}, {"rows", rows}};
}

json to_json(const PhiCheck& c) {
    json v = json::array();
    for (const auto& x : c.violations)
        v.push_back({{"law", std::string(to_string(x.law))},
                     {"first", x.first},
                     {"second", x.second},
                     {"union_member", optional_value(x.union_member)},
                     {"lhs", x.lhs},
                     {"rhs", x.rhs}});
    return {{"pairs", c.pairs},
            {"subset_pairs", c.subset_pairs},
            {"disjoint_pairs", c.disjoint_pairs},
            {"union_pairs", c.union_pairs},
            {"undecided_pairs", c.undecided_pairs},
            {"violations", v}};
}

json to_json(const ConditionBReport& r) {
    return {{"eps", r.eps},
            {"top_level", r.top_level},
            {"satisfied_at", optional_value(r.satisfied_at)},
            {"outside_mass", numbers(r.outside_mass)}};
}

json to_json(const NontrivialityVerdict& v) {
    json w = json::array();
    for (const auto& x : v.witnesses) w.push_back({{"member", x.member}, {"from_level", x.from_level}, {"min_value", x.min_value}});
    return {{"c_floor", v.c_floor},
            {"nontrivial", v.nontrivial},
            {"possibly_infinite_volume", v.possibly_infinite_volume},
            {"total_volumes", numbers(v.total_volumes)},
            {"range_ball_ratio", v.range_ball_ratio ? number(*v.range_ball_ratio) : json(nullptr)},
            {"witness_count", v.witnesses.size()},
            {"witnesses", w}};
}

json to_json(const MinimalityReport& r) {
    return {{"min_delta", r.min_delta}, {"trials", r.trials}, {"negative_count", r.negative_count}, {"worst_move", r.worst_move}};
}

json to_json(const ClosureReport& r) {
    return {{"s", r.spin_dimension},
            {"N", r.hilbert_trunc},
            {"trials", r.trials},
            {"violations", r.violations},
            {"max_tail_step", r.max_tail_step}};
}

json to_json(const DimensionReport& r, bool with_local) {
    json j = {{"estimator", "correlation-sum slope (proxy for Hausdorff dimension)"},
              {"global_estimate", r.global_estimate},
              {"fit_quality", r.fit_quality},
              {"degenerate", r.degenerate},
              {"radii_used", numbers(r.radii_used)},
              {"correlation_sums", numbers(r.correlation_sums)},
              {"pair_counts", r.pair_counts}};
    if (with_local) j["local_estimates"] = numbers(r.local_estimates);
    return j;
}

json to_json(const ClassReport& r) {
    auto pairs = [](const std::vector<PairViolation>& v) {
        json a = json::array();
        for (const auto& p : v) a.push_back({{"i", p.i}, {"j", p.j}, {"value", p.value}, {"bound", p.bound}});
        return a;
    };
    return {{"sample_size", r.sample_size},
            {"pairs_checked", r.pairs_checked},
            {"declared_c", r.declared_c},
            {"diagonal_min", number(r.diagonal_min)},
            {"condition_a", r.condition_a},
            {"plateau_radius_estimate", number(r.plateau_radius_estimate)},
            {"range_violations", pairs(r.range_violations)},
            {"decay_pairs_checked", r.decay_pairs_checked},
            {"decay_violations", pairs(r.decay_violations)}};
}

json to_json(const ConvergenceTrace& t) {
    return {{"member_id", t.member_id}, {"from_level", t.from_level}, {"to_level", t.to_level}, {"discrepancy", numbers(t.discrepancy)}};
}

namespace {

Point point_from_json(const json& j, const SpaceConfig& space, const std::string& where) {
    if (!j.is_object() || !j.contains("level")) throw ConfigError(where, "expected a serialized point");
    const int level = j.at("level").get<int>();
    if (space.realization == Realization::euclidean) {
        if (!j.contains("coords")) throw ConfigError(where, "missing coords");
        return parse_point(j.at("coords"), level, space, where + ".coords");
    }
    json op = j;
    op.erase("level");
    return parse_point(op, level, space, where);
}

double get_double(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(where + "." + key, "expected a number");
    return j.at(key).get<double>();
}

}  // namespace

LevelSolution level_solution_from_json(const json& j, const SpaceConfig& space) {
    const std::string w = "solution";
    if (!j.is_object() || !j.contains("measure") || !j.contains("candidate_grid"))
        throw ConfigError(w, "expected a serialized level solution with measure and candidate_grid");
    LevelSolution s;
    s.level = j.at("level").get<int>();
    s.s_param = get_double(j, "s_param", w);
    s.lambda = get_double(j, "lambda", w);
    s.action_value = get_double(j, "action", w);
    s.iterations = j.value("iterations", 0);
    s.converged = j.value("converged", false);
    s.qp_tolerance = get_double(j, "qp_tolerance", w);
    s.insertion_tolerance = get_double(j, "insertion_tolerance", w);
    const json& m = j.at("measure");
    std::vector<Atom> atoms;
    const json& ja = m.at("atoms");
    for (std::size_t i = 0; i < ja.size(); ++i) {
        const auto aw = w + ".measure.atoms[" + std::to_string(i) + "]";
        atoms.push_back({point_from_json(ja[i].at("point"), space, aw + ".point"), get_double(ja[i], "weight", aw)});
    }
    try {
        s.measure = DiscreteMeasure(std::move(atoms), m.at("level").get<int>());
    } catch (const Error& e) {
        throw ConfigError(w + ".measure", e.what());
    }
    const json& g = j.at("candidate_grid");
    for (std::size_t i = 0; i < g.size(); ++i)
        s.candidate_grid.push_back(point_from_json(g[i], space, w + ".candidate_grid[" + std::to_string(i) + "]"));
    return s;
}

}  // namespace cvp::cli
