#include "cvp/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cvp/error.hpp"
#include "cvp/numeric.hpp"
#include "cvp/parallel.hpp"

namespace cvp {
namespace {

// Signed weights of a difference, positive part first.
struct SignedAtoms {
    std::vector<const Point*> points;
    std::vector<double> weights;
};

SignedAtoms flatten(const SignedDifference& d) {
    SignedAtoms s;
    for (const auto& a : d.plus.atoms()) {
        s.points.push_back(&a.point);
        s.weights.push_back(a.weight);
    }
    for (const auto& a : d.minus.atoms()) {
        s.points.push_back(&a.point);
        s.weights.push_back(-a.weight);
    }
    return s;
}

}  // namespace

double potential(const LagrangianKernel& k, const DiscreteMeasure& m, const Point& x) {
    std::vector<double> terms;
    terms.reserve(m.size());
    for (const auto& a : m.atoms()) terms.push_back(a.weight * k(x, a.point));
    return pairwise_sum(terms);
}

double action(const LagrangianKernel& k, const DiscreteMeasure& m) {
    const auto& atoms = m.atoms();
    std::vector<double> rows(atoms.size());
    parallel_for(atoms.size(), [&](std::size_t i) { rows[i] = atoms[i].weight * potential(k, m, atoms[i].point); });
    return pairwise_sum(rows);
}

double ell(const LagrangianKernel& k, const DiscreteMeasure& m, const Point& x, double s_param) {
    return potential(k, m, x) - s_param;
}

double delta_action(const LagrangianKernel& k, const DiscreteMeasure& rho, const DiscreteMeasure& rho_tilde,
                    double volume_tol) {
    const SignedDifference diff = difference(rho_tilde, rho);
    if (std::abs(diff.net_change()) > volume_tol)
        throw Error(ErrorKind::not_a_variation,
                    "net volume change " + std::to_string(diff.net_change()) + " exceeds tolerance");
    const SignedAtoms d = flatten(diff);
    std::vector<double> cross(d.points.size()), quad(d.points.size());
    parallel_for(d.points.size(), [&](std::size_t i) {
        cross[i] = d.weights[i] * potential(k, rho, *d.points[i]);
        std::vector<double> row(d.points.size());
        for (std::size_t j = 0; j < d.points.size(); ++j) row[j] = d.weights[j] * k(*d.points[i], *d.points[j]);
        quad[i] = d.weights[i] * pairwise_sum(row);
    });
    return 2.0 * pairwise_sum(cross) + pairwise_sum(quad);
}

ELReport el_residual(const LagrangianKernel& k, const DiscreteMeasure& m, std::span<const Point> probes,
                     double s_param) {
    if (probes.empty()) throw Error(ErrorKind::invalid_argument, "el_residual needs at least one probe");
    ELReport rep;
    rep.s_param = s_param;
    rep.probe_count = probes.size();
    for (const auto& a : m.atoms())
        rep.support_residual = std::max(rep.support_residual, std::abs(ell(k, m, a.point, s_param)));
    std::vector<double> values(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) { values[i] = ell(k, m, probes[i], s_param); });
    const auto worst = std::min_element(values.begin(), values.end());
    rep.worst_probe = static_cast<std::size_t>(worst - values.begin());
    rep.min_probe_ell = *worst;
    rep.exterior_violation = std::max(0.0, -*worst);
    return rep;
}

double check_condition_iv(const LagrangianKernel& k, const DiscreteMeasure& m, std::span<const Point> probes) {
    if (probes.empty()) throw Error(ErrorKind::invalid_argument, "condition (iv) check needs probes");
    double best = 0.0;
    for (const auto& p : probes) best = std::max(best, potential(k, m, p));
    for (const auto& a : m.atoms()) best = std::max(best, potential(k, m, a.point));
    return best;
}

}  // namespace cvp
