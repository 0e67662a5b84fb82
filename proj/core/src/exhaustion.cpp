#include "cvp/exhaustion.hpp"

#include <algorithm>
#include <cmath>

#include "cvp/error.hpp"
#include "cvp/numeric.hpp"
#include "cvp/parallel.hpp"

namespace cvp {
namespace {

constexpr double kLawTol = 1e-9;
constexpr double kStableRel = 1e-3;

bool in_ambient(const TestSet& b, const Point& p) {
    return std::any_of(b.balls.begin(), b.balls.end(),
                       [&](const Ball& ball) { return distance(p, ball.center) <= ball.radius; });
}

}  // namespace

std::vector<const LevelSolution*> Construction::successful() const {
    std::vector<const LevelSolution*> out;
    for (const auto& l : levels)
        if (l.ok()) out.push_back(&*l.solution);
    return out;
}

const DiscreteMeasure& Construction::final_measure() const {
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
        if (it->ok()) return *it->extended;
    throw Error(ErrorKind::construction_failed, "no successful level");
}

DiscreteMeasure restrict_to(const DiscreteMeasure& m, const TestSet& d) {
    std::vector<Atom> atoms;
    for (const auto& a : m.atoms())
        if (contains(d, a.point)) atoms.push_back(a);
    return DiscreteMeasure(std::move(atoms), m.level());
}

double bl_discrepancy_lower_bound(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    double best = std::abs(a.total_volume() - b.total_volume());
    auto tent_integral = [](const DiscreteMeasure& m, const Point& c) {
        std::vector<double> terms;
        for (const auto& at : m.atoms()) terms.push_back(at.weight * std::max(0.0, 1.0 - distance(at.point, c)));
        return pairwise_sum(terms);
    };
    for (const auto* m : {&a, &b})
        for (const auto& at : m->atoms())
            best = std::max(best, std::abs(tent_integral(a, at.point) - tent_integral(b, at.point)));
    return best;
}

Construction assemble_construction(std::vector<LevelOutcome> levels, const TestSetFamily& family, int tail_window) {
    if (family.members.empty()) throw Error(ErrorKind::invalid_argument, "test family is empty");
    if (tail_window < 1) throw Error(ErrorKind::invalid_argument, "tail window must be >= 1");
    Construction c;
    c.levels = std::move(levels);
    c.max_level = 1;
    for (const auto& l : c.levels) c.max_level = std::max(c.max_level, l.level);

    std::size_t ok = 0;
    for (auto& l : c.levels) {
        if (!l.ok()) continue;
        ++ok;
        if (!l.extended) l.extended = extend_by_zero(l.solution->measure, c.max_level);
        c.phi.levels.push_back(l.level);
    }
    if (ok < std::min<std::size_t>(2, c.levels.size()) || ok == 0)
        throw Error(ErrorKind::construction_failed,
                    std::to_string(ok) + " of " + std::to_string(c.levels.size()) + " levels succeeded");

    c.phi.tail_window = tail_window;
    c.phi.rows.resize(family.members.size());
    parallel_for(family.members.size(), [&](std::size_t i) {
        PhiRow& row = c.phi.rows[i];
        row.member_id = family.members[i].id;
        for (const auto& l : c.levels)
            if (l.ok()) row.sequence.push_back(measure_of(*l.extended, family.members[i]));
        row.phi_hat = row.sequence.back();
        row.c_k_bound = *std::max_element(row.sequence.begin(), row.sequence.end());
        const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(tail_window), row.sequence.size());
        for (std::size_t k = row.sequence.size() - t; k < row.sequence.size(); ++k)
            row.tail_osc = std::max(row.tail_osc, std::abs(row.sequence[k] - row.phi_hat));
        row.stabilized = row.tail_osc <= kStableRel * row.phi_hat;
    });

    // Convergence traces for members that ever carry mass.
    for (std::size_t i = 0; i < family.members.size(); ++i) {
        if (c.phi.rows[i].c_k_bound <= 0.0) continue;
        ConvergenceTrace trace;
        trace.member_id = family.members[i].id;
        const LevelOutcome* prev = nullptr;
        for (const auto& l : c.levels) {
            if (!l.ok()) continue;
            if (prev) {
                trace.from_level.push_back(prev->level);
                trace.to_level.push_back(l.level);
                trace.discrepancy.push_back(bl_discrepancy_lower_bound(
                    restrict_to(*prev->extended, family.members[i]), restrict_to(*l.extended, family.members[i])));
            }
            prev = &l;
        }
        c.traces.push_back(std::move(trace));
    }
    return c;
}

Construction run_construction(const LagrangianKernel& k, std::span<const SolverConfig> per_level,
                              const TestSetFamily& family, int tail_window) {
    if (per_level.empty()) throw Error(ErrorKind::invalid_argument, "no levels to solve");
    for (std::size_t i = 1; i < per_level.size(); ++i)
        if (per_level[i].level <= per_level[i - 1].level)
            throw Error(ErrorKind::invalid_argument, "level configs must have strictly increasing levels");

    std::vector<LevelOutcome> outcomes(per_level.size());
    parallel_for(per_level.size(), [&](std::size_t i) {
        outcomes[i].level = per_level[i].level;
        try {
            outcomes[i].solution = solve_level(k, per_level[i]);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });
    return assemble_construction(std::move(outcomes), family, tail_window);
}

// --- set-function laws --------------------------------------------------------------

std::string_view to_string(PhiLaw law) noexcept {
    switch (law) {
        case PhiLaw::monotonicity: return "monotonicity";
        case PhiLaw::subadditivity: return "subadditivity";
        case PhiLaw::additivity: return "additivity";
    }
    return "unknown";
}

PhiCheck check_phi_properties(const PhiTable& phi, const TestSetFamily& family) {
    if (phi.rows.size() != family.members.size())
        throw Error(ErrorKind::invalid_argument, "phi table does not match the family");
    PhiCheck out;
    const std::size_t n = family.members.size();
    auto value = [&](std::size_t i) { return phi.rows[i].phi_hat; };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto& da = family.members[a];
            const auto& db = family.members[b];
            const bool ordered = a < b;
            if (ordered) ++out.pairs;
            bool decided = false;
            if (provably_subset(da, db)) {
                decided = true;
                ++out.subset_pairs;
                if (value(a) > value(b) + kLawTol)
                    out.violations.push_back({PhiLaw::monotonicity, a, b, std::nullopt, value(a), value(b)});
            }
            if (!ordered) continue;
            const auto u = family.find_union(a, b);
            if (u) {
                decided = true;
                ++out.union_pairs;
                const double lhs = value(*u), rhs = value(a) + value(b);
                if (lhs > rhs + kLawTol) out.violations.push_back({PhiLaw::subadditivity, a, b, u, lhs, rhs});
            }
            if (provably_disjoint(da, db)) {
                decided = true;
                ++out.disjoint_pairs;
                if (u) {
                    const double lhs = value(*u), rhs = value(a) + value(b);
                    if (std::abs(lhs - rhs) > kLawTol) out.violations.push_back({PhiLaw::additivity, a, b, u, lhs, rhs});
                }
            }
            if (!decided && !provably_subset(db, da)) ++out.undecided_pairs;
        }
    }
    // Every value must be a nonnegative set-function value.
    for (std::size_t a = 0; a < n; ++a)
        if (value(a) < 0.0) out.violations.push_back({PhiLaw::monotonicity, a, a, std::nullopt, value(a), 0.0});
    return out;
}

SetValue mu_hat(const PhiTable& phi, const TestSetFamily& family, const OpenRegion& u) {
    SetValue out;
    for (std::size_t i = 0; i < family.members.size(); ++i) {
        if (!subset_of(family.members[i], u)) continue;
        if (!out.witness || phi.rows[i].phi_hat > out.value) {
            out.value = phi.rows[i].phi_hat;
            out.witness = i;
        }
    }
    return out;
}

SetValue eta_hat(const PhiTable& phi, const TestSetFamily& family, const TestSet& a,
                 std::span<const OpenRegion> candidates) {
    if (candidates.empty()) throw Error(ErrorKind::invalid_argument, "eta_hat needs candidate regions");
    SetValue out;
    out.value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!subset_of(a, candidates[c])) continue;
        const double v = mu_hat(phi, family, candidates[c]).value;
        if (v < out.value) {
            out.value = v;
            out.witness = c;
        }
    }
    return out;
}

// --- conditions ---------------------------------------------------------------------

ConditionBReport check_condition_B(const DiscreteMeasure& final_measure, const TestSet& b, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "condition B needs eps > 0");
    ConditionBReport rep;
    rep.eps = eps;
    rep.top_level = final_measure.level();
    for (int n = 1; n <= rep.top_level; ++n) {
        std::vector<double> w;
        for (const auto& a : final_measure.atoms())
            if (a.point.intrinsic_level() > n && in_ambient(b, a.point)) w.push_back(a.weight);
        rep.outside_mass.push_back(pairwise_sum(w));
    }
    const int last = rep.top_level > 1 ? rep.top_level - 1 : 1;
    for (int n = 1; n <= last; ++n) {
        if (rep.outside_mass[static_cast<std::size_t>(n - 1)] < eps) {
            rep.satisfied_at = n;
            break;
        }
    }
    return rep;
}

ConditionBReport check_condition_B(std::span<const LevelSolution> levels, const TestSet& b, double eps) {
    if (levels.empty()) throw Error(ErrorKind::invalid_argument, "condition B needs at least one level");
    int top = 1;
    for (const auto& l : levels) top = std::max(top, l.level);
    return check_condition_B(extend_by_zero(levels.back().measure, top), b, eps);
}

NontrivialityVerdict check_nontriviality(std::span<const LevelSolution> levels, const TestSetFamily& family,
                                         double c_floor, const LagrangianKernel* kernel) {
    if (!(c_floor > 0.0)) throw Error(ErrorKind::invalid_argument, "c_floor must be positive");
    if (levels.empty()) throw Error(ErrorKind::invalid_argument, "nontriviality needs at least one level");
    NontrivialityVerdict v;
    v.c_floor = c_floor;
    int top = 1;
    for (const auto& l : levels) top = std::max(top, l.level);
    std::vector<DiscreteMeasure> extended;
    for (const auto& l : levels) {
        extended.push_back(extend_by_zero(l.measure, top));
        v.total_volumes.push_back(l.measure.total_volume());
    }
    const std::size_t persistence = std::min<std::size_t>(2, levels.size());
    for (std::size_t i = 0; i < family.members.size(); ++i) {
        std::size_t run = 0;
        double run_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = extended.size(); k-- > 0;) {
            const double val = measure_of(extended[k], family.members[i]);
            if (val < c_floor) break;
            ++run;
            run_min = std::min(run_min, val);
        }
        if (run >= persistence)
            v.witnesses.push_back({i, levels[levels.size() - run].level, run_min});
    }
    v.nontrivial = !v.witnesses.empty();
    for (std::size_t a = 0; a < v.witnesses.size() && !v.possibly_infinite_volume; ++a)
        for (std::size_t b = a + 1; b < v.witnesses.size(); ++b)
            if (provably_disjoint(family.members[v.witnesses[a].member], family.members[v.witnesses[b].member])) {
                v.possibly_infinite_volume = true;
                break;
            }

    if (kernel && kernel->range_radius() && kernel->bound()) {
        double ratio = std::numeric_limits<double>::infinity();
        for (const auto& l : levels) {
            if (!(l.s_param > 0.0)) continue;
            for (const auto& a : l.measure.atoms()) {
                const Ball ball{a.point, *kernel->range_radius(), top};
                ratio = std::min(ratio, *kernel->bound() * measure_of(l.measure, ball) / l.s_param);
            }
        }
        if (std::isfinite(ratio)) v.range_ball_ratio = ratio;
    }
    return v;
}

}  // namespace cvp
