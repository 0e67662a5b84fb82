#include "cvp/measure.hpp"

#include <cmath>
#include <string>

#include "cvp/error.hpp"
#include "cvp/numeric.hpp"

namespace cvp {
namespace {

template <class Pred>
double sum_where(const DiscreteMeasure& m, Pred&& inside) {
    std::vector<double> w;
    for (const auto& a : m.atoms())
        if (inside(a.point)) w.push_back(a.weight);
    return pairwise_sum(w);
}

std::optional<std::size_t> find_atom(const std::vector<Atom>& atoms, const Point& p) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (distance(atoms[i].point, p) <= atom_merge_distance) return i;
    return std::nullopt;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(int level) : level_(level) {
    if (level < 1) throw Error(ErrorKind::invalid_argument, "measure level must be positive");
}

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, int level) : level_(level) {
    if (level < 1) throw Error(ErrorKind::invalid_argument, "measure level must be positive");
    atoms_.reserve(atoms.size());
    for (auto& a : atoms) {
        if (!std::isfinite(a.weight) || a.weight < 0.0)
            throw Error(ErrorKind::invalid_argument, "atom weights must be finite and nonnegative");
        if (a.point.level() > level)
            throw Error(ErrorKind::level_downcast, "atom at level " + std::to_string(a.point.level()) +
                                                       " in a level-" + std::to_string(level) + " measure");
        if (a.weight == 0.0) continue;
        if (auto k = find_atom(atoms_, a.point)) {
            atoms_[*k].weight += a.weight;
        } else {
            atoms_.push_back(std::move(a));
        }
    }
}

double DiscreteMeasure::total_volume() const {
    const auto w = weights();
    return pairwise_sum(w);
}

std::vector<double> DiscreteMeasure::weights() const {
    std::vector<double> w;
    w.reserve(atoms_.size());
    for (const auto& a : atoms_) w.push_back(a.weight);
    return w;
}

DiscreteMeasure DiscreteMeasure::scaled(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::invalid_argument, "scale must be positive");
    DiscreteMeasure out(level_);
    out.atoms_ = atoms_;
    for (auto& a : out.atoms_) a.weight *= t;
    return out;
}

DiscreteMeasure merge(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    std::vector<Atom> atoms = a.atoms();
    atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
    return DiscreteMeasure(std::move(atoms), std::max(a.level(), b.level()));
}

double measure_of(const DiscreteMeasure& m, const TestSet& s) {
    return sum_where(m, [&](const Point& p) { return contains(s, p); });
}

double measure_of(const DiscreteMeasure& m, const OpenRegion& u) {
    return sum_where(m, [&](const Point& p) { return contains(u, p); });
}

double measure_of(const DiscreteMeasure& m, const Ball& b) {
    return sum_where(m, [&](const Point& p) { return contains(b, p); });
}

DiscreteMeasure extend_by_zero(const DiscreteMeasure& mn, int target_level) {
    if (target_level < mn.level())
        throw Error(ErrorKind::level_downcast, "extend_by_zero target below the measure level");
    std::vector<Atom> atoms;
    atoms.reserve(mn.size());
    for (const auto& a : mn.atoms()) atoms.push_back({lift(a.point, target_level), a.weight});
    return DiscreteMeasure(std::move(atoms), target_level);
}

SignedDifference difference(const DiscreteMeasure& rho_tilde, const DiscreteMeasure& rho) {
    const int level = std::max(rho_tilde.level(), rho.level());
    std::vector<Atom> plus, minus;
    std::vector<char> matched(rho.size(), 0);
    for (const auto& a : rho_tilde.atoms()) {
        double w = 0.0;
        if (auto k = find_atom(rho.atoms(), a.point)) {
            matched[*k] = 1;
            w = rho.atoms()[*k].weight;
        }
        const double d = a.weight - w;
        if (d > 0.0) plus.push_back({a.point, d});
        if (d < 0.0) minus.push_back({a.point, -d});
    }
    for (std::size_t k = 0; k < rho.size(); ++k)
        if (!matched[k]) minus.push_back(rho.atoms()[k]);

    SignedDifference out{DiscreteMeasure(std::move(plus), level), DiscreteMeasure(std::move(minus), level), {}};
    for (const auto* part : {&out.plus, &out.minus})
        for (const auto& a : part->atoms())
            out.region.balls.push_back({a.point, atom_merge_distance, a.point.level()});
    return out;
}

bool is_variation_of_finite_volume(const DiscreteMeasure& rho_tilde, const DiscreteMeasure& rho, double tol) {
    if (tol < 0.0) throw Error(ErrorKind::invalid_argument, "tolerance must be nonnegative");
    return std::abs(difference(rho_tilde, rho).net_change()) <= tol;
}

std::vector<Point> support(const DiscreteMeasure& m) {
    std::vector<Point> pts;
    pts.reserve(m.size());
    for (const auto& a : m.atoms()) pts.push_back(a.point);
    return pts;
}

}  // namespace cvp
