#include "cvp/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cvp/rng.hpp"

namespace cvp::cli {
namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }
std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    require_object(j, where);
    for (const auto& [key, _] : j.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError(join(where, key), "unknown field");
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(join(where, key), "missing required field");
    return j.at(key);
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where, "expected a finite number");
    return v;
}

long long as_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where, "expected an integer");
    return j.get<long long>();
}

int as_int(const json& j, const std::string& where, long long lo) {
    const long long v = as_integer(j, where);
    if (v < lo || v > 1'000'000'000) throw ConfigError(where, "must be an integer >= " + std::to_string(lo));
    return static_cast<int>(v);
}

bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where, "expected true or false");
    return j.get<bool>();
}

double positive(const json& j, const std::string& where) {
    const double v = as_number(j, where);
    if (!(v > 0.0)) throw ConfigError(where, "must be positive");
    return v;
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], at(where, i)));
    return out;
}

DistanceTable parse_table(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where, "expected a non-empty array of [distance, value] pairs");
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto w = at(where, i);
        if (!j[i].is_array() || j[i].size() != 2) throw ConfigError(w, "expected [distance, value]");
        knots.emplace_back(as_number(j[i][0], w + "[0]"), as_number(j[i][1], w + "[1]"));
    }
    try {
        return DistanceTable(std::move(knots));
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
}

int slice_dim(const SpaceConfig& space, int level) { return level * space.dims_per_level; }

std::vector<double> padded_coords(const json& j, int level, const SpaceConfig& space, const std::string& where) {
    std::vector<double> c = number_list(j, where);
    const auto n = static_cast<std::size_t>(slice_dim(space, level));
    if (c.size() > n)
        throw ConfigError(where, "has " + std::to_string(c.size()) + " coordinates but level " +
                                     std::to_string(level) + " allows " + std::to_string(n));
    c.resize(n, 0.0);
    return c;
}

// Smallest level whose slice holds the given number of coordinates.
int level_for(std::size_t ncoords, const SpaceConfig& space) {
    const auto dpl = static_cast<std::size_t>(space.dims_per_level);
    return std::max(1, static_cast<int>((ncoords + dpl - 1) / dpl));
}

// Row-major N x r matrix of [re, im] pairs; missing trailing rows are zero.
Eigen::MatrixXcd parse_frame(const json& j, const SpaceConfig& space, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(where, "expected rows of [re, im] pairs");
    const auto rows = j.size(), cols = j[0].size();
    if (rows > static_cast<std::size_t>(space.hilbert_trunc)) throw ConfigError(where, "more rows than space.hilbert_trunc");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(space.hilbert_trunc, static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto rw = at(where, r);
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(rw, "ragged frame row");
        for (std::size_t c = 0; c < cols; ++c) {
            const auto v = number_list(j[r][c], at(rw, c));
            if (v.size() != 2) throw ConfigError(at(rw, c), "expected [re, im]");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {v[0], v[1]};
        }
    }
    return m;
}

std::vector<Point> lattice_points(const json& j, int level, const SpaceConfig& space, const std::string& where) {
    check_keys(j, where, {"ranges", "steps"});
    const json& ranges = field(j, "ranges", where);
    const json& steps = field(j, "steps", where);
    if (!ranges.is_array() || !steps.is_array() || ranges.size() != steps.size() || ranges.empty())
        throw ConfigError(where, "ranges and steps must be arrays of equal, nonzero length");
    const auto dim = ranges.size();
    if (dim > static_cast<std::size_t>(slice_dim(space, level)))
        throw ConfigError(join(where, "ranges"), "more axes than the level-" + std::to_string(level) + " slice");
    std::vector<std::vector<double>> axes(dim);
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        const auto rw = at(join(where, "ranges"), a);
        const auto r = number_list(ranges[a], rw);
        if (r.size() != 2 || r[1] < r[0]) throw ConfigError(rw, "expected [lo, hi] with lo <= hi");
        const int n = as_int(steps[a], at(join(where, "steps"), a), 1);
        for (int i = 0; i < n; ++i) axes[a].push_back(n == 1 ? r[0] : (r[0] * (n - 1 - i) + r[1] * i) / (n - 1));
        total *= static_cast<std::size_t>(n);
        if (total > 10'000'000) throw ConfigError(where, "lattice too large");
    }
    std::vector<Point> out;
    out.reserve(total);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t k = 0; k < total; ++k) {
        std::vector<double> c(static_cast<std::size_t>(slice_dim(space, level)), 0.0);
        for (std::size_t a = 0; a < dim; ++a) c[a] = axes[a][idx[a]];
        out.emplace_back(level, std::move(c), space.dims_per_level);
        for (std::size_t a = dim; a-- > 0;) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
    }
    return out;
}

std::vector<Point> uniform_points(const json& j, int level, const SpaceConfig& space, const std::string& where,
                                  const std::string& stream_name) {
    check_keys(j, where, {"ranges", "count"});
    const json& ranges = field(j, "ranges", where);
    if (!ranges.is_array() || ranges.empty() || ranges.size() > static_cast<std::size_t>(slice_dim(space, level)))
        throw ConfigError(join(where, "ranges"), "expected 1..slice-dimension [lo, hi] pairs");
    std::vector<std::pair<double, double>> box;
    for (std::size_t a = 0; a < ranges.size(); ++a) {
        const auto r = number_list(ranges[a], at(join(where, "ranges"), a));
        if (r.size() != 2 || r[1] < r[0]) throw ConfigError(at(join(where, "ranges"), a), "expected [lo, hi]");
        box.emplace_back(r[0], r[1]);
    }
    const int count = as_int(field(j, "count", where), join(where, "count"), 1);
    Rng rng = stream(space.seed, stream_name);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) {
        std::vector<double> c(static_cast<std::size_t>(slice_dim(space, level)), 0.0);
        for (std::size_t a = 0; a < box.size(); ++a) c[a] = box[a].first + (box[a].second - box[a].first) * u(rng);
        out.emplace_back(level, std::move(c), space.dims_per_level);
    }
    return out;
}

std::vector<Point> random_operators(const json& j, int level, const SpaceConfig& space, const std::string& where,
                                    const std::string& stream_name) {
    check_keys(j, where, {"count", "eigenvalues"});
    const int count = as_int(field(j, "count", where), join(where, "count"), 1);
    const auto ev = number_list(field(j, "eigenvalues", where), join(where, "eigenvalues"));
    Rng rng = stream(space.seed, stream_name);
    std::vector<Point> out;
    try {
        for (int i = 0; i < count; ++i)
            out.emplace_back(level,
                             OperatorPoint::random(rng, space.spin_dimension, space.hilbert_trunc,
                                                   Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size())),
                                                   slice_dim(space, level)),
                             space.dims_per_level);
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
    return out;
}

// One block of points: explicit list, lattice, uniform sample or random operators.
std::vector<Point> parse_block(const json& j, int level, const SpaceConfig& space, const std::string& where,
                               const std::string& stream_name) {
    int kinds = 0;
    std::vector<Point> out;
    if (j.contains("points")) {
        ++kinds;
        const json& pts = j.at("points");
        if (!pts.is_array()) throw ConfigError(join(where, "points"), "expected an array");
        for (std::size_t i = 0; i < pts.size(); ++i) out.push_back(parse_point(pts[i], level, space, at(join(where, "points"), i)));
    }
    if (j.contains("lattice")) {
        ++kinds;
        if (space.realization != Realization::euclidean) throw ConfigError(join(where, "lattice"), "needs the euclidean realization");
        out = lattice_points(j.at("lattice"), level, space, join(where, "lattice"));
    }
    if (j.contains("uniform")) {
        ++kinds;
        if (space.realization != Realization::euclidean) throw ConfigError(join(where, "uniform"), "needs the euclidean realization");
        out = uniform_points(j.at("uniform"), level, space, join(where, "uniform"), stream_name);
    }
    if (j.contains("random_operators")) {
        ++kinds;
        if (space.realization != Realization::operator_)
            throw ConfigError(join(where, "random_operators"), "needs the operator realization");
        out = random_operators(j.at("random_operators"), level, space, join(where, "random_operators"), stream_name);
    }
    if (kinds != 1) throw ConfigError(where, "expected exactly one of points, lattice, uniform, random_operators");
    return out;
}

int parse_level(const json& j, const SpaceConfig& space, const std::string& where) {
    const int level = as_int(field(j, "level", where), join(where, "level"), 1);
    if (level > space.max_level)
        throw ConfigError(join(where, "level"), "exceeds space.max_level = " + std::to_string(space.max_level));
    return level;
}

SpaceConfig parse_space(const json& j) {
    const std::string w = "space";
    check_keys(j, w, {"realization", "dims_per_level", "max_level", "seed", "spin_dimension", "hilbert_trunc"});
    SpaceConfig s;
    const std::string real = j.value("realization", std::string("euclidean"));
    if (real == "euclidean")
        s.realization = Realization::euclidean;
    else if (real == "operator")
        s.realization = Realization::operator_;
    else
        throw ConfigError(join(w, "realization"), "expected \"euclidean\" or \"operator\"");
    if (j.contains("dims_per_level")) s.dims_per_level = as_int(j["dims_per_level"], join(w, "dims_per_level"), 1);
    s.max_level = as_int(field(j, "max_level", w), join(w, "max_level"), 1);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError(join(w, "seed"), "expected a nonnegative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("spin_dimension")) s.spin_dimension = as_int(j["spin_dimension"], join(w, "spin_dimension"), 1);
    s.hilbert_trunc = s.max_level * s.dims_per_level;
    if (j.contains("hilbert_trunc")) {
        s.hilbert_trunc = as_int(j["hilbert_trunc"], join(w, "hilbert_trunc"), 1);
        if (s.hilbert_trunc < s.max_level * s.dims_per_level)
            throw ConfigError(join(w, "hilbert_trunc"), "must be at least max_level * dims_per_level");
    }
    return s;
}

LagrangianKernel parse_kernel(const json& doc, const SpaceConfig& space) {
    const std::string w = "kernel";
    const json& j = field(doc, "kernel", "");
    require_object(j, w);
    const std::string kind = j.value("kind", std::string());
    try {
        if (kind == "bounded_range") {
            check_keys(j, w, {"kind", "c", "R", "p"});
            BoundedRangeParams p;
            p.plateau = positive(field(j, "c", w), join(w, "c"));
            p.cutoff = positive(field(j, "R", w), join(w, "R"));
            if (j.contains("p")) p.exponent = positive(j["p"], join(w, "p"));
            return LagrangianKernel::bounded_range(p);
        }
        if (kind == "entropy_vanishing") {
            check_keys(j, w, {"kind", "c", "delta", "f_table", "exhaustion_ref", "sample_budget"});
            if (space.realization != Realization::euclidean)
                throw ConfigError(w, "entropy_vanishing needs the euclidean realization");
            EntropyVanishingParams p;
            p.plateau = positive(field(j, "c", w), join(w, "c"));
            p.plateau_radius = positive(field(j, "delta", w), join(w, "delta"));
            p.envelope = parse_table(field(j, "f_table", w), join(w, "f_table"));
            if (j.contains("sample_budget")) p.sample_budget = as_int(j["sample_budget"], join(w, "sample_budget"), 1);
            const json& ref = field(j, "exhaustion_ref", w);
            if (!ref.is_string()) throw ConfigError(join(w, "exhaustion_ref"), "expected a name");
            const auto name = ref.get<std::string>();
            const bool listed = doc.contains("exhaustions") && doc["exhaustions"].contains(name);
            if (name == "origin" && !listed) {
                p.exhaustion = origin_exhaustion(space.max_level, space.dims_per_level);
                return LagrangianKernel::entropy_vanishing(std::move(p));
            }
            if (!listed) throw ConfigError(join(w, "exhaustion_ref"), "no exhaustion named \"" + name + "\"");
            const json& ex = doc["exhaustions"][name];
            const std::string ew = "exhaustions." + name;
            if (!ex.is_array() || ex.empty()) throw ConfigError(ew, "expected a non-empty array of test sets");
            for (std::size_t i = 0; i < ex.size(); ++i) p.exhaustion.push_back(parse_test_set(ex[i], space, at(ew, i)));
            return LagrangianKernel::entropy_vanishing(std::move(p));
        }
        if (kind == "causal_fermion") {
            check_keys(j, w, {"kind", "s", "N"});
            if (space.realization != Realization::operator_)
                throw ConfigError(w, "causal_fermion needs the operator realization");
            CausalFermionParams p;
            p.spin_dimension = as_int(field(j, "s", w), join(w, "s"), 1);
            p.hilbert_trunc = as_int(field(j, "N", w), join(w, "N"), 1);
            if (p.spin_dimension != space.spin_dimension || p.hilbert_trunc != space.hilbert_trunc)
                throw ConfigError(w, "s and N must match space.spin_dimension and space.hilbert_trunc");
            return LagrangianKernel::causal_fermion(p);
        }
        if (kind == "user_table") {
            check_keys(j, w, {"kind", "c", "R", "table"});
            UserTableParams p;
            p.table = parse_table(field(j, "table", w), join(w, "table"));
            std::optional<double> range;
            if (j.contains("R")) range = positive(j["R"], join(w, "R"));
            return LagrangianKernel::user_table(std::move(p), positive(field(j, "c", w), join(w, "c")), range);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(w, e.what());
    }
    throw ConfigError(join(w, "kind"),
                      "expected bounded_range, entropy_vanishing, causal_fermion or user_table");
}

std::vector<std::vector<Point>> parse_grids(const json& doc, const SpaceConfig& space) {
    const json& g = field(doc, "grids", "");
    if (!g.is_array() || g.empty()) throw ConfigError("grids", "expected a non-empty array");
    std::vector<std::vector<Point>> own(static_cast<std::size_t>(space.max_level));
    std::vector<bool> inherit(static_cast<std::size_t>(space.max_level), true);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto w = at("grids", i);
        check_keys(g[i], w, {"level", "inherit", "points", "lattice", "uniform", "random_operators"});
        const int level = parse_level(g[i], space, w);
        if (g[i].contains("inherit")) inherit[static_cast<std::size_t>(level - 1)] = as_bool(g[i]["inherit"], join(w, "inherit"));
        auto pts = parse_block(g[i], level, space, w, "grid/" + std::to_string(i));
        auto& dst = own[static_cast<std::size_t>(level - 1)];
        dst.insert(dst.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
    }
    std::vector<std::vector<Point>> grids(own.size());
    for (std::size_t k = 0; k < own.size(); ++k) {
        const int level = static_cast<int>(k) + 1;
        if (k > 0 && inherit[k])
            for (const auto& p : grids[k - 1]) grids[k].push_back(lift(p, level));
        grids[k].insert(grids[k].end(), own[k].begin(), own[k].end());
        if (grids[k].empty()) throw ConfigError("grids", "level " + std::to_string(level) + " has no candidate points");
    }
    return grids;
}

FamilyConfig parse_family(const json& doc, const SpaceConfig& space) {
    const std::string w = "family";
    const json& j = field(doc, "family", "");
    check_keys(j, w, {"sample", "radii", "union_depth", "max_members", "tail_window"});
    FamilyConfig f;
    const json& s = field(j, "sample", w);
    if (!s.is_array() || s.empty()) throw ConfigError(join(w, "sample"), "expected a non-empty array of point blocks");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto bw = at(join(w, "sample"), i);
        check_keys(s[i], bw, {"level", "points", "lattice", "uniform", "random_operators"});
        auto pts = parse_block(s[i], parse_level(s[i], space, bw), space, bw, "family/" + std::to_string(i));
        f.sample.insert(f.sample.end(), pts.begin(), pts.end());
    }
    f.radii = number_list(field(j, "radii", w), join(w, "radii"));
    if (f.radii.empty()) throw ConfigError(join(w, "radii"), "needs at least one radius");
    for (std::size_t i = 0; i < f.radii.size(); ++i)
        if (!(f.radii[i] > 0.0)) throw ConfigError(at(join(w, "radii"), i), "must be positive");
    if (j.contains("union_depth")) f.union_depth = as_int(j["union_depth"], join(w, "union_depth"), 0);
    if (j.contains("max_members"))
        f.max_members = static_cast<std::size_t>(as_int(j["max_members"], join(w, "max_members"), 1));
    if (j.contains("tail_window")) f.tail_window = as_int(j["tail_window"], join(w, "tail_window"), 1);
    return f;
}

SolverConfig parse_solver(const json& doc) {
    SolverConfig c;
    if (!doc.contains("solver")) return c;
    const std::string w = "solver";
    const json& j = doc["solver"];
    check_keys(j, w, {"initial_volume", "max_outer_iters", "qp_tolerance", "insertion_tolerance", "weight_floor",
                      "normalize_to_one"});
    if (j.contains("initial_volume")) c.initial_volume = positive(j["initial_volume"], join(w, "initial_volume"));
    if (j.contains("max_outer_iters")) c.max_outer_iters = as_int(j["max_outer_iters"], join(w, "max_outer_iters"), 1);
    if (j.contains("qp_tolerance")) c.qp_tolerance = positive(j["qp_tolerance"], join(w, "qp_tolerance"));
    if (j.contains("insertion_tolerance"))
        c.insertion_tolerance = positive(j["insertion_tolerance"], join(w, "insertion_tolerance"));
    if (j.contains("weight_floor")) {
        c.weight_floor = as_number(j["weight_floor"], join(w, "weight_floor"));
        if (c.weight_floor < 0.0) throw ConfigError(join(w, "weight_floor"), "must be nonnegative");
    }
    if (j.contains("normalize_to_one")) c.normalize_to_one = as_bool(j["normalize_to_one"], join(w, "normalize_to_one"));
    return c;
}

// A check entry is absent, false (disabled), true (defaults) or an object.
const json* check_entry(const json& checks, const char* name) {
    if (!checks.contains(name)) return nullptr;
    const json& e = checks[name];
    const std::string w = join("checks", name);
    if (e.is_boolean()) return e.get<bool>() ? &e : nullptr;
    require_object(e, w);
    return &e;
}

ChecksConfig parse_checks(const json& doc, const SpaceConfig& space) {
    ChecksConfig c;
    if (!doc.contains("checks")) return c;
    const json& j = doc["checks"];
    check_keys(j, "checks",
               {"euler_lagrange", "phi_properties", "condition_B", "condition_iv", "minimality", "closure", "dimension",
                "nontriviality", "kernel_class", "mu_samples"});
    auto num_or = [](const json& e, const char* key, double dflt, const std::string& w) {
        return e.is_object() && e.contains(key) ? as_number(e[key], join(w, key)) : dflt;
    };
    auto int_or = [](const json& e, const char* key, int dflt, const std::string& w, long long lo) {
        return e.is_object() && e.contains(key) ? as_int(e[key], join(w, key), lo) : dflt;
    };
    if (const json* e = check_entry(j, "euler_lagrange")) {
        const std::string w = "checks.euler_lagrange";
        if (e->is_object()) check_keys(*e, w, {"tol"});
        c.euler_lagrange_tol = num_or(*e, "tol", 1e-5, w);
        if (!(*c.euler_lagrange_tol > 0.0)) throw ConfigError(join(w, "tol"), "must be positive");
    }
    if (const json* e = check_entry(j, "phi_properties")) {
        if (e->is_object()) check_keys(*e, "checks.phi_properties", {});
        c.phi_properties = true;
    }
    if (const json* e = check_entry(j, "condition_B")) {
        const std::string w = "checks.condition_B";
        if (!e->is_object()) throw ConfigError(w, "expected {eps, set}");
        check_keys(*e, w, {"eps", "set"});
        const double eps = as_number(field(*e, "eps", w), join(w, "eps"));
        if (!(eps > 0.0)) throw ConfigError(join(w, "eps"), "must be positive (eps = 0 is not a valid threshold)");
        c.condition_b_eps = eps;
        c.condition_b_set = parse_test_set(field(*e, "set", w), space, join(w, "set"));
    }
    if (const json* e = check_entry(j, "condition_iv")) {
        if (e->is_object()) check_keys(*e, "checks.condition_iv", {});
        c.condition_iv = true;
    }
    if (const json* e = check_entry(j, "minimality")) {
        const std::string w = "checks.minimality";
        if (e->is_object()) check_keys(*e, w, {"trials"});
        c.minimality_trials = int_or(*e, "trials", 200, w, 1);
    }
    if (const json* e = check_entry(j, "closure")) {
        const std::string w = "checks.closure";
        if (e->is_object()) check_keys(*e, w, {"s", "N", "trials"});
        ChecksConfig::Closure cl;
        cl.s = int_or(*e, "s", cl.s, w, 1);
        cl.n = int_or(*e, "N", cl.n, w, 1);
        cl.trials = int_or(*e, "trials", cl.trials, w, 1);
        c.closure = cl;
    }
    if (const json* e = check_entry(j, "dimension")) {
        const std::string w = "checks.dimension";
        if (!e->is_object()) throw ConfigError(w, "expected {radii, source}");
        check_keys(*e, w, {"radii", "source"});
        ChecksConfig::Dimension d;
        d.radii = number_list(field(*e, "radii", w), join(w, "radii"));
        const std::string src = e->value("source", std::string("support"));
        if (src != "support" && src != "grid") throw ConfigError(join(w, "source"), "expected \"support\" or \"grid\"");
        d.from_support = src == "support";
        c.dimension = d;
    }
    if (const json* e = check_entry(j, "nontriviality")) {
        const std::string w = "checks.nontriviality";
        if (!e->is_object()) throw ConfigError(w, "expected {c_floor}");
        check_keys(*e, w, {"c_floor"});
        c.nontriviality_floor = positive(field(*e, "c_floor", w), join(w, "c_floor"));
    }
    if (const json* e = check_entry(j, "kernel_class")) {
        const std::string w = "checks.kernel_class";
        if (e->is_object()) check_keys(*e, w, {"sample"});
        c.kernel_class_sample = int_or(*e, "sample", 200, w, 2);
    }
    if (const json* e = check_entry(j, "mu_samples")) {
        const std::string w = "checks.mu_samples";
        if (!e->is_object()) throw ConfigError(w, "expected {regions}");
        check_keys(*e, w, {"regions"});
        const json& r = field(*e, "regions", w);
        if (!r.is_array()) throw ConfigError(join(w, "regions"), "expected an array");
        for (std::size_t i = 0; i < r.size(); ++i)
            c.mu_regions.push_back(parse_open_region(r[i], space, at(join(w, "regions"), i)));
    }
    return c;
}

OutputConfig parse_output(const json& doc) {
    OutputConfig o;
    if (!doc.contains("output")) return o;
    const std::string w = "output";
    const json& j = doc["output"];
    check_keys(j, w, {"dir", "formats"});
    if (j.contains("dir")) {
        if (!j["dir"].is_string() || j["dir"].get<std::string>().empty())
            throw ConfigError(join(w, "dir"), "expected a non-empty path");
        o.dir = j["dir"].get<std::string>();
    }
    if (j.contains("formats")) {
        const json& f = j["formats"];
        if (!f.is_array()) throw ConfigError(join(w, "formats"), "expected an array");
        o.json = o.csv = false;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string v = f[i].is_string() ? f[i].get<std::string>() : "";
            if (v == "json")
                o.json = true;
            else if (v == "csv")
                o.csv = true;
            else
                throw ConfigError(at(join(w, "formats"), i), "expected \"json\" or \"csv\"");
        }
    }
    return o;
}

}  // namespace

std::vector<SolverConfig> ExperimentConfig::level_configs() const {
    std::vector<SolverConfig> out;
    for (std::size_t k = 0; k < grids.size(); ++k) {
        SolverConfig c = solver;
        c.level = static_cast<int>(k) + 1;
        c.candidate_grid = grids[k];
        c.seed = space.seed;
        out.push_back(std::move(c));
    }
    return out;
}

Point parse_point(const json& j, int level, const SpaceConfig& space, const std::string& where) {
    try {
        if (space.realization == Realization::euclidean) return Point(level, padded_coords(j, level, space, where), space.dims_per_level);
        check_keys(j, where, {"eigenvalues", "frame"});
        const auto ev = number_list(field(j, "eigenvalues", where), join(where, "eigenvalues"));
        const Eigen::MatrixXcd frame = parse_frame(field(j, "frame", where), space, join(where, "frame"));
        OperatorPoint op(Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size())), frame,
                         space.spin_dimension);
        return Point(level, std::move(op), space.dims_per_level);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
}

TestSet parse_test_set(const json& j, const SpaceConfig& space, const std::string& where) {
    const json* balls = &j;
    std::string bw = where;
    if (j.is_object() && j.contains("balls")) {
        check_keys(j, where, {"balls", "id"});
        balls = &j["balls"];
        bw = join(where, "balls");
    }
    TestSet set;
    auto one = [&](const json& b, const std::string& w) {
        check_keys(b, w, {"center", "radius", "level"});
        const int level = b.contains("level") ? parse_level(b, space, w) : space.max_level;
        const json& c = field(b, "center", w);
        int center_level = level;
        if (space.realization == Realization::euclidean && c.is_array())
            center_level = std::min(level, level_for(c.size(), space));
        const double r = as_number(field(b, "radius", w), join(w, "radius"));
        if (r < 0.0) throw ConfigError(join(w, "radius"), "must be nonnegative");
        set.balls.push_back(Ball{parse_point(c, center_level, space, join(w, "center")), r, level});
    };
    if (balls->is_array()) {
        for (std::size_t i = 0; i < balls->size(); ++i) one((*balls)[i], at(bw, i));
    } else if (balls->is_object()) {
        one(*balls, bw);
    } else {
        throw ConfigError(where, "expected a ball, an array of balls or {balls: [...]}");
    }
    if (set.balls.empty()) throw ConfigError(where, "a test set needs at least one ball");
    return set;
}

OpenRegion parse_open_region(const json& j, const SpaceConfig& space, const std::string& where) {
    const json* balls = &j;
    std::string bw = where;
    if (j.is_object() && j.contains("balls")) {
        check_keys(j, where, {"balls"});
        balls = &j["balls"];
        bw = join(where, "balls");
    }
    if (!balls->is_array() || balls->empty()) throw ConfigError(where, "expected a non-empty array of open balls");
    OpenRegion u;
    for (std::size_t i = 0; i < balls->size(); ++i) {
        const auto w = at(bw, i);
        const json& b = (*balls)[i];
        check_keys(b, w, {"center", "radius"});
        const json& c = field(b, "center", w);
        const int level = space.realization == Realization::euclidean && c.is_array()
                              ? std::min(space.max_level, level_for(c.size(), space))
                              : space.max_level;
        u.balls.push_back(OpenBall{parse_point(c, level, space, join(w, "center")), positive(field(b, "radius", w), join(w, "radius"))});
    }
    return u;
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto pos = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos > 0 ? pos - 1 : 0), '\n');
        throw ConfigError(origin + ":" + std::to_string(line), std::string("parse error: ") + e.what());
    }
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path.string());
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + o, "expected dotted.path=value");
        const std::string path = o.substr(0, eq);
        const std::string text = o.substr(eq + 1);
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) value = text;
        json* node = &doc;
        std::stringstream ss(path);
        std::string seg;
        std::vector<std::string> segs;
        while (std::getline(ss, seg, '.')) segs.push_back(seg);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto& s = segs[i];
            if (s.empty()) throw ConfigError("--set " + o, "empty path segment");
            if (node->is_array()) {
                std::size_t idx = 0;
                try {
                    idx = std::stoul(s);
                } catch (const std::exception&) {
                    throw ConfigError("--set " + path, "segment \"" + s + "\" must index an array");
                }
                if (idx >= node->size()) throw ConfigError("--set " + path, "index " + s + " out of range");
                node = &(*node)[idx];
            } else {
                if (node->is_null()) *node = json::object();
                if (!node->is_object()) throw ConfigError("--set " + path, "segment \"" + s + "\" is not inside an object");
                node = &(*node)[s];
            }
        }
        *node = std::move(value);
    }
}

ExperimentConfig parse_config(const json& doc) {
    require_object(doc, "(root)");
    check_keys(doc, "", {"space", "kernel", "exhaustions", "grids", "family", "solver", "checks", "output"});
    ExperimentConfig cfg;
    cfg.source = doc;
    cfg.space = parse_space(field(doc, "space", ""));
    cfg.kernel = parse_kernel(doc, cfg.space);
    cfg.grids = parse_grids(doc, cfg.space);
    cfg.family = parse_family(doc, cfg.space);
    cfg.solver = parse_solver(doc);
    cfg.checks = parse_checks(doc, cfg.space);
    cfg.output = parse_output(doc);
    try {
        for (const auto& c : cfg.level_configs()) c.validate();
    } catch (const Error& e) {
        throw ConfigError("solver", e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = load_json_file(path);
    apply_overrides(doc, overrides);
    return parse_config(doc);
}

}  // namespace cvp::cli
