#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvp/space.hpp"

namespace cvp {

struct Signature {
    int positive = 0;
    int negative = 0;
};

/// 1e-8 times the spectral norm of a (the default counting band).
double default_signature_tol(const Eigen::MatrixXcd& a);

/// Eigenvalues above tol / below -tol of a self-adjoint matrix; values inside
/// the band count as neither. Throws shape_error if ||A - A^H|| exceeds tol.
Signature eigen_signature(const Eigen::MatrixXcd& a, double tol);
Signature eigen_signature(const OperatorPoint& a, double tol);

struct ClosureReport {
    int spin_dimension = 1;
    int hilbert_trunc = 1;
    int trials = 0;
    int violations = 0;
    double max_tail_step = 0.0;  // ||x_K - x_{K-1}|| at the truncation, worst trial
};

/// Builds Cauchy sequences of admissible operators (at most s positive and s
/// negative eigenvalues), takes the numerical limit and recounts its signature
/// with a dense eigensolver at tol 1e-8. Returns the number of limits with more
/// than s positive or s negative eigenvalues.
ClosureReport closure_test(int s, int n, int trials, std::uint64_t seed);

/// Correlation-sum dimension proxy. Hausdorff dimension is not computable from
/// samples; the slopes here only estimate it.
struct DimensionReport {
    double global_estimate = 0.0;
    std::vector<double> local_estimates;
    std::vector<double> radii_used;
    std::vector<double> correlation_sums;  // normalized pair counts C(r)
    std::vector<std::uint64_t> pair_counts;
    double fit_quality = 0.0;  // R^2 of the log-log fit
    bool degenerate = false;
};

DimensionReport estimate_dimension(std::span<const Point> points, std::span<const double> radii);

}  // namespace cvp
