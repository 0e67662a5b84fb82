#pragma once

// Independent reference computations for the tests. None of these call into
// the library's numerical code paths; they work on dense matrices, brute-force
// enumeration or closed forms.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Characteristic polynomial coefficients c_0..c_n (c_n = 1) by Faddeev-LeVerrier.
std::vector<std::complex<double>> characteristic_polynomial(const Eigen::MatrixXcd& a);

/// Roots of a monic polynomial by Durand-Kerner iteration.
std::vector<std::complex<double>> polynomial_roots(const std::vector<std::complex<double>>& coeffs);

/// Sum of |root| of the characteristic polynomial.
double spectral_weight(const Eigen::MatrixXcd& a);

/// Causal Lagrangian from the full N x N product: sum |l|^2 - (1/2s)(sum |l|)^2.
double causal_lagrangian_dense(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y, int s);

/// Signature of a self-adjoint matrix by a dense eigensolver.
std::pair<int, int> dense_signature(const Eigen::MatrixXcd& a, double tol);

/// min w^T G w over the simplex sum w = v, w >= 0, by enumerating the grid with
/// spacing step * v. Cost grows like (1/step)^(n-1).
double simplex_grid_min(const Eigen::MatrixXd& g, double v, double step);

/// min w^T G w over the simplex by enumerating every support subset and
/// solving its stationarity system G_S w_S = mu 1 directly (n <= 12).
double subset_qp_min(const Eigen::MatrixXd& g, double v);

/// Smallest number of closed delta-balls centred at the given points covering
/// all of them (exhaustive branch and bound, n <= 64).
int exact_discrete_cover(const std::vector<Eigen::VectorXd>& pts, double delta);

/// Covering number of a segment of the given length by closed delta-balls.
int segment_cover(double length, double delta);

}  // namespace oracle
