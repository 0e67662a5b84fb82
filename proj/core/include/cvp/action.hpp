#pragma once

#include <cstddef>
#include <span>

#include "cvp/kernels.hpp"
#include "cvp/measure.hpp"

namespace cvp {

/// Euler-Lagrange diagnostics of a measure against a probe set.
struct ELReport {
    double s_param = 0.0;
    double support_residual = 0.0;    // max over atoms of |ell|
    double exterior_violation = 0.0;  // max(0, -min over probes of ell)
    std::size_t probe_count = 1;
    std::size_t worst_probe = 0;      // probe attaining the minimum of ell
    double min_probe_ell = 0.0;
};

/// sum_i sum_j w_i w_j L(x_i, x_j), diagonal included.
double action(const LagrangianKernel& k, const DiscreteMeasure& m);

/// sum_j w_j L(x, x_j)
double potential(const LagrangianKernel& k, const DiscreteMeasure& m, const Point& x);

/// ell(x) = sum_j w_j L(x, x_j) - s_param
double ell(const LagrangianKernel& k, const DiscreteMeasure& m, const Point& x, double s_param);

/// S(rho_tilde) - S(rho) from the signed difference D = rho_tilde - rho:
/// 2 <D, rho> + <D, D>. Throws not_a_variation when the volume changes by more
/// than `volume_tol`.
double delta_action(const LagrangianKernel& k, const DiscreteMeasure& rho, const DiscreteMeasure& rho_tilde,
                    double volume_tol = 1e-9);

ELReport el_residual(const LagrangianKernel& k, const DiscreteMeasure& m, std::span<const Point> probes,
                     double s_param);

/// max over probes and atoms of sum_j w_j L(x, x_j): a finite lower bound on
/// sup_x of the potential.
double check_condition_iv(const LagrangianKernel& k, const DiscreteMeasure& m, std::span<const Point> probes);

}  // namespace cvp
