#include "cvp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cvp/numeric.hpp"
#include "cvp/rng.hpp"

namespace cvp {
namespace {

constexpr double kIllConditioned = 1e12;

double objective(const Eigen::MatrixXd& g, const Eigen::VectorXd& w) { return w.dot(g * w); }

// lambda / 2 equals the potential on the support; at a KKT point it also
// equals w^T G w / V.
double multiplier(const Eigen::MatrixXd& g, const Eigen::VectorXd& w, double volume) {
    return 2.0 * objective(g, w) / volume;
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& y, double volume) {
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double t = (cumulative - volume) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    return (y.array() - theta).max(0.0).matrix();
}

struct EqpResult {
    Eigen::VectorXd v;
    double lambda = 0.0;
    bool ok = false;
};

// Stationary point of v^T G_FF v on {sum v = V}.
EqpResult solve_face(const Eigen::MatrixXd& g, const std::vector<int>& face, double volume) {
    const auto k = static_cast<Eigen::Index>(face.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) kkt(a, b) = 2.0 * g(face[a], face[b]);
        kkt(a, k) = -1.0;
        kkt(k, a) = 1.0;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs[k] = volume;
    EqpResult out;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol;
    if (lu.isInvertible()) {
        sol = lu.solve(rhs);
    } else {
        sol = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(kkt).solve(rhs);
    }
    if (!sol.allFinite()) return out;
    out.v = sol.head(k);
    out.lambda = sol[k];
    out.ok = std::abs(out.v.sum() - volume) <= 1e-9 * std::max(1.0, volume);
    return out;
}

double face_condition(const Eigen::MatrixXd& g, const Eigen::VectorXd& w) {
    std::vector<int> face;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) face.push_back(static_cast<int>(i));
    if (face.empty()) return 1.0;
    Eigen::MatrixXd sub(face.size(), face.size());
    for (std::size_t a = 0; a < face.size(); ++a)
        for (std::size_t b = 0; b < face.size(); ++b) sub(a, b) = g(face[a], face[b]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    const auto& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

WeightSolution finish(const Eigen::MatrixXd& g, Eigen::VectorXd w, double volume, int iterations, bool fallback) {
    WeightSolution out;
    out.weights = std::move(w);
    out.objective = objective(g, out.weights);
    out.lambda = multiplier(g, out.weights, volume);
    out.kkt_residual = kkt_residual(g, out.weights, out.lambda);
    out.iterations = iterations;
    out.used_fallback = fallback;
    out.condition_estimate = face_condition(g, out.weights);
    out.ill_conditioned = out.condition_estimate > kIllConditioned;
    return out;
}

// Projected gradient from w; used when the active-set pass cannot make progress
// (indefinite faces, degenerate cycling).
Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& g, Eigen::VectorXd w, double volume, double tol,
                                   int max_iters, int& iterations) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double norm = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    const double step = 1.0 / (2.0 * norm);
    for (int it = 0; it < max_iters; ++it) {
        ++iterations;
        w = project_simplex(w - step * 2.0 * (g * w), volume);
        if (kkt_residual(g, w, multiplier(g, w, volume)) <= tol) break;
    }
    return w;
}

}  // namespace

void SolverConfig::validate() const {
    if (level < 1) throw Error(ErrorKind::invalid_argument, "solver level must be positive");
    if (candidate_grid.empty()) throw Error(ErrorKind::invalid_argument, "candidate grid is empty");
    if (!(initial_volume > 0.0)) throw Error(ErrorKind::invalid_argument, "initial volume must be positive");
    if (!(qp_tolerance > 0.0) || !(insertion_tolerance > 0.0))
        throw Error(ErrorKind::invalid_argument, "tolerances must be positive");
    if (weight_floor < 0.0) throw Error(ErrorKind::invalid_argument, "weight floor must be nonnegative");
    if (max_outer_iters < 1) throw Error(ErrorKind::invalid_argument, "max_outer_iters must be positive");
    for (const auto& p : candidate_grid)
        if (p.level() > level)
            throw Error(ErrorKind::invalid_argument, "grid point above the solver level");
}

double kkt_residual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& w, double lambda) {
    const Eigen::VectorXd gw = gram * w;
    const double mu = 0.5 * lambda;
    double r = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        r = std::max(r, w[i] > 0.0 ? std::abs(gw[i] - mu) : std::max(0.0, mu - gw[i]));
    return r;
}

WeightSolution solve_weights(const Eigen::MatrixXd& g, double volume, double tol, const Eigen::VectorXd* warm) {
    const Eigen::Index n = g.rows();
    if (n == 0 || g.cols() != n) throw Error(ErrorKind::invalid_argument, "weight QP needs a nonempty square Gram matrix");
    if (!(volume > 0.0)) throw Error(ErrorKind::invalid_argument, "volume must be positive");
    if (!(tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (warm && warm->size() == n && warm->minCoeff() >= 0.0 && warm->sum() > 0.0) {
        w = *warm * (volume / warm->sum());
    } else {
        Eigen::Index start = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (g(i, i) < g(start, start)) start = i;
        w[start] = volume;
    }

    const int max_iters = 20 * static_cast<int>(n) + 100;
    int iterations = 0;
    const double add_tol = 0.5 * tol;
    bool stuck = false;

    while (iterations < max_iters) {
        ++iterations;
        std::vector<int> face;
        for (Eigen::Index i = 0; i < n; ++i)
            if (w[i] > 0.0) face.push_back(static_cast<int>(i));
        const EqpResult eqp = solve_face(g, face, volume);
        if (!eqp.ok) {
            stuck = true;
            break;
        }
        const Eigen::Index k = eqp.v.size();
        bool interior = true;
        for (Eigen::Index a = 0; a < k; ++a) interior = interior && eqp.v[a] > 0.0;

        if (interior) {
            Eigen::VectorXd trial = Eigen::VectorXd::Zero(n);
            for (Eigen::Index a = 0; a < k; ++a) trial[face[a]] = eqp.v[a];
            if (objective(g, trial) > objective(g, w) + 1e-14 * std::max(1.0, std::abs(objective(g, w)))) {
                stuck = true;  // face is not convex
                break;
            }
            w = trial;
            const Eigen::VectorXd gw = g * w;
            const double mu = 0.5 * eqp.lambda;
            Eigen::Index enter = -1;
            double worst = -add_tol;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (w[i] > 0.0) continue;
                const double slack = gw[i] - mu;
                if (slack < worst) {
                    worst = slack;
                    enter = i;
                }
            }
            if (enter < 0) break;
            // Tiny positive seed weight so the next face contains the entering index.
            const double seed = std::min(1e-12 * volume, 0.5 * w.maxCoeff());
            const Eigen::Index donor = [&] {
                Eigen::Index d = 0;
                w.maxCoeff(&d);
                return d;
            }();
            w[donor] -= seed;
            w[enter] = seed;
        } else {
            // Walk toward the face minimizer until the first weight hits zero.
            double alpha = 1.0;
            int blocking = -1;
            for (Eigen::Index a = 0; a < k; ++a) {
                const double cur = w[face[a]];
                const double dir = eqp.v[a] - cur;
                if (eqp.v[a] <= 0.0 && dir < 0.0) {
                    const double t = cur / -dir;
                    if (t < alpha) {
                        alpha = t;
                        blocking = face[a];
                    }
                }
            }
            for (Eigen::Index a = 0; a < k; ++a) w[face[a]] += alpha * (eqp.v[a] - w[face[a]]);
            if (blocking >= 0) w[blocking] = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (w[i] < 1e-300) w[i] = 0.0;
            const double s = w.sum();
            if (!(s > 0.0)) {
                stuck = true;
                break;
            }
            w *= volume / s;
        }
    }

    bool fallback = false;
    if (stuck || iterations >= max_iters || kkt_residual(g, w, multiplier(g, w, volume)) > tol) {
        fallback = true;
        w = projected_gradient(g, w, volume, tol, 200000, iterations);
    }
    WeightSolution out = finish(g, std::move(w), volume, iterations, fallback);
    if (out.kkt_residual > tol)
        throw SolverStall("weight QP KKT residual " + std::to_string(out.kkt_residual) + " above tolerance", out);
    return out;
}

WeightSolution solve_weights(const LagrangianKernel& k, std::span<const Point> support, double volume, double tol) {
    if (support.empty()) throw Error(ErrorKind::invalid_argument, "weight QP needs a nonempty support");
    for (std::size_t i = 0; i < support.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (distance(support[i], support[j]) <= atom_merge_distance)
                throw Error(ErrorKind::invalid_argument, "support points must be pairwise distinct");
    return solve_weights(gram_matrix(k, support), volume, tol);
}

// --- level solve ------------------------------------------------------------------

LevelSolution solve_level(const LagrangianKernel& k, const SolverConfig& cfg) {
    cfg.validate();

    LevelSolution sol;
    sol.level = cfg.level;
    sol.measure = DiscreteMeasure(cfg.level);
    sol.qp_tolerance = cfg.qp_tolerance;
    sol.insertion_tolerance = cfg.insertion_tolerance;
    for (const auto& p : cfg.candidate_grid) {
        const bool dup = std::any_of(sol.candidate_grid.begin(), sol.candidate_grid.end(),
                                     [&](const Point& q) { return distance(p, q) <= atom_merge_distance; });
        if (!dup) sol.candidate_grid.push_back(p);
    }
    const auto& grid = sol.candidate_grid;
    const Eigen::MatrixXd gram = gram_matrix(k, grid);
    const auto n = static_cast<Eigen::Index>(grid.size());

    std::vector<int> support;
    {
        Eigen::Index start = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (gram(i, i) < gram(start, start)) start = i;
        support.push_back(static_cast<int>(start));
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(1, cfg.initial_volume);
    double lambda = 0.0;

    auto sub_gram = [&](const std::vector<int>& idx) {
        Eigen::MatrixXd s(idx.size(), idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = gram(idx[a], idx[b]);
        return s;
    };

    auto assemble = [&](const std::vector<int>& idx, const Eigen::VectorXd& weights) {
        std::vector<std::pair<int, double>> order;
        for (std::size_t a = 0; a < idx.size(); ++a) order.emplace_back(idx[a], weights[static_cast<Eigen::Index>(a)]);
        std::sort(order.begin(), order.end());
        std::vector<Atom> atoms;
        for (const auto& [i, wt] : order) atoms.push_back({grid[static_cast<std::size_t>(i)], wt});
        return DiscreteMeasure(std::move(atoms), cfg.level);
    };

    bool converged = false;
    int iter = 0;
    try {
        for (iter = 1; iter <= cfg.max_outer_iters; ++iter) {
            WeightSolution ws = solve_weights(sub_gram(support), cfg.initial_volume, cfg.qp_tolerance, &w);
            // Drop atoms under the floor and re-solve on what is left.
            while (true) {
                std::vector<int> kept;
                Eigen::VectorXd kept_w(ws.weights.size());
                Eigen::Index m = 0;
                for (std::size_t a = 0; a < support.size(); ++a) {
                    const double wt = ws.weights[static_cast<Eigen::Index>(a)];
                    if (wt > cfg.weight_floor) {
                        kept.push_back(support[a]);
                        kept_w[m++] = wt;
                    }
                }
                if (kept.empty())
                    throw LevelFailure(ErrorKind::degenerate_solution, "all atoms fell below the weight floor",
                                       std::nullopt);
                if (kept.size() == support.size()) break;
                support = std::move(kept);
                kept_w.conservativeResize(m);
                ws = solve_weights(sub_gram(support), cfg.initial_volume, cfg.qp_tolerance, &kept_w);
            }
            if (ws.ill_conditioned)
                sol.warnings.push_back("ill-conditioned Gram face at outer iteration " + std::to_string(iter));
            w = ws.weights;
            lambda = ws.lambda;
            sol.action_history.push_back(ws.objective);

            const double mu = 0.5 * lambda;
            int enter = -1;
            double worst = -cfg.insertion_tolerance;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (std::find(support.begin(), support.end(), static_cast<int>(i)) != support.end()) continue;
                double pot = 0.0;
                for (std::size_t a = 0; a < support.size(); ++a)
                    pot += w[static_cast<Eigen::Index>(a)] * gram(i, support[a]);
                const double l = pot - mu;
                if (l < worst) {
                    worst = l;
                    enter = static_cast<int>(i);
                }
            }
            if (enter < 0) {
                converged = true;
                break;
            }
            support.push_back(enter);
            w.conservativeResize(w.size() + 1);
            w[w.size() - 1] = 0.0;
        }
    } catch (const SolverStall& stall) {
        LevelSolution partial = sol;
        partial.iterations = iter;
        const auto& best = stall.best().weights;
        if (best.size() == static_cast<Eigen::Index>(support.size()) && best.sum() > 0.0)
            partial.measure = assemble(support, best);
        partial.lambda = stall.best().lambda;
        throw LevelFailure(ErrorKind::solver_stall, stall.what(), std::move(partial));
    }
    if (w.size() > static_cast<Eigen::Index>(support.size())) w.conservativeResize(static_cast<Eigen::Index>(support.size()));

    sol.iterations = std::min(iter, cfg.max_outer_iters);
    sol.converged = converged;
    sol.lambda = lambda;
    double s_param = 0.5 * lambda;
    if (cfg.normalize_to_one) {
        if (!(lambda > 0.0))
            throw LevelFailure(ErrorKind::degenerate_solution, "nonpositive multiplier; cannot normalize", sol);
        w *= 2.0 / lambda;
        s_param = 1.0;
    }
    sol.measure = assemble(support, w);
    sol.s_param = s_param;
    sol.el_report = el_residual(k, sol.measure, grid, s_param);
    sol.action_value = action(k, sol.measure);
    return sol;
}

// --- minimality -------------------------------------------------------------------

namespace {

struct Variation {
    std::vector<Atom> atoms;
    std::string label;
};

void shift_mass(std::vector<Atom>& atoms, std::size_t from, const Point& to, double amount) {
    atoms[from].weight -= amount;
    if (atoms[from].weight < 0.0) atoms[from].weight = 0.0;
    for (auto& a : atoms) {
        if (distance(a.point, to) <= atom_merge_distance) {
            a.weight += amount;
            return;
        }
    }
    atoms.push_back({to, amount});
}

}  // namespace

MinimalityReport verify_minimality(const LagrangianKernel& k, const LevelSolution& sol, int trials,
                                   std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorKind::invalid_argument, "verify_minimality needs trials >= 1");
    const auto& rho = sol.measure;
    if (rho.empty()) throw Error(ErrorKind::invalid_argument, "verify_minimality on an empty measure");
    Rng rng = stream(seed, "minimality");
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Candidate-grid points off the support, per atom sorted by distance.
    std::vector<std::size_t> fresh;
    for (std::size_t g = 0; g < sol.candidate_grid.size(); ++g) {
        const auto& p = sol.candidate_grid[g];
        const bool on = std::any_of(rho.atoms().begin(), rho.atoms().end(),
                                    [&](const Atom& a) { return distance(a.point, p) <= atom_merge_distance; });
        if (!on) fresh.push_back(g);
    }
    constexpr std::size_t kNearby = 8;
    std::vector<std::vector<std::size_t>> nearby(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t g : fresh) d.emplace_back(distance(rho.atoms()[i].point, sol.candidate_grid[g]), g);
        std::sort(d.begin(), d.end());
        for (std::size_t a = 0; a < std::min(kNearby, d.size()); ++a) nearby[i].push_back(d[a].second);
    }

    auto pick = [&](std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n))); };

    auto rebalance = [&](std::vector<Atom>& atoms) -> bool {
        if (atoms.size() < 2) return false;
        const std::size_t i = pick(atoms.size());
        std::size_t j = pick(atoms.size() - 1);
        if (j >= i) ++j;
        const double t = unit(rng) * atoms[i].weight;
        const Point target = atoms[j].point;
        shift_mass(atoms, i, target, t);
        return true;
    };
    auto transport = [&](std::vector<Atom>& atoms) -> bool {
        const std::size_t i = pick(rho.size());
        if (nearby[i].empty()) return false;
        const std::size_t g = nearby[i][pick(nearby[i].size())];
        std::size_t src = i;
        for (std::size_t a = 0; a < atoms.size(); ++a)
            if (distance(atoms[a].point, rho.atoms()[i].point) <= atom_merge_distance) src = a;
        const double t = unit(rng) * atoms[src].weight;
        shift_mass(atoms, src, sol.candidate_grid[g], t);
        return true;
    };

    MinimalityReport rep;
    rep.trials = trials;
    rep.min_delta = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        std::vector<Atom> atoms = rho.atoms();
        const int move = static_cast<int>(pick(3));
        std::string label;
        if (move == 0) {
            label = rebalance(atoms) ? "rebalance" : (transport(atoms) ? "transport" : "identity");
        } else if (move == 1) {
            label = transport(atoms) ? "transport" : (rebalance(atoms) ? "rebalance" : "identity");
        } else {
            const bool a = rebalance(atoms);
            const bool b = transport(atoms);
            label = a && b ? "combined" : a ? "rebalance" : b ? "transport" : "identity";
        }
        const DiscreteMeasure rho_tilde(std::move(atoms), rho.level());
        const double ds = delta_action(k, rho, rho_tilde, 1e-9 * std::max(1.0, rho.total_volume()));
        if (ds < -1e-8) ++rep.negative_count;
        if (ds < rep.min_delta) {
            rep.min_delta = ds;
            rep.worst_move = label;
        }
    }
    return rep;
}

LevelSolution corrupt_solution(const LagrangianKernel& k, const LevelSolution& sol) {
    const auto& atoms = sol.measure.atoms();
    if (atoms.size() < 2) throw Error(ErrorKind::invalid_argument, "corruption needs at least two atoms");
    std::size_t heavy = 0;
    for (std::size_t i = 1; i < atoms.size(); ++i)
        if (atoms[i].weight > atoms[heavy].weight) heavy = i;
    std::size_t partner = heavy == 0 ? 1 : 0;
    double least = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i == heavy) continue;
        const double v = k(atoms[heavy].point, atoms[i].point);
        if (v < least) {
            least = v;
            partner = i;
        }
    }
    std::vector<Atom> changed = atoms;
    const double moved = 0.5 * changed[heavy].weight;
    changed[heavy].weight -= moved;
    changed[partner].weight += moved;
    LevelSolution out = sol;
    out.measure = DiscreteMeasure(std::move(changed), sol.measure.level());
    out.action_value = action(k, out.measure);
    out.el_report = el_residual(k, out.measure, sol.candidate_grid, sol.s_param);
    out.converged = false;
    return out;
}

}  // namespace cvp
