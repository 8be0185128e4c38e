#pragma once

#include "fkqho/ground_state.hpp"

#include <complex>
#include <vector>

namespace fkqho {

/// Quantum numbers n = (n_1, ..., n_r).
struct MultiIndex {
  std::vector<int> n;

  int order() const;
  double factorial() const;  // n_1! * ... * n_r!
};

/// All multi-indices with |n| <= max_order, graded lexicographic, starting
/// with the null index. Count is C(max_order + r, r).
std::vector<MultiIndex> enumerate_multi_indices(int r, int max_order);

/// Probabilists' Hermite polynomial He_k by the three-term recurrence.
double hermite(int k, double z);

/// Product polynomial H^r_n(z) = prod He_{n_i}(z_i).
double hermite(const MultiIndex& n, const VectorXd& z);

/// Gauss-Hermite rule for the standard Gaussian weight N(0,1); weights sum
/// to one.
void gauss_hermite(int n, VectorXd& nodes, VectorXd& weights);

/// Eigenstructure of the conjugated generator for reversible models.
struct SpectralBasis {
  MatrixXd Lambda_h;  // symmetric negative definite
  MatrixXd Z;         // orthogonal eigenvectors, rates ascending
  VectorXd rates;     // 0 < rate_1 <= ... <= rate_r
  double lambda0;
  int max_order;
  MatrixXd whiten;  // Z' (P_h_inf)^{-1/2}
  std::vector<MultiIndex> indices;
};

/// Requires a reversible model; checks the two algebraic routes to Lambda_h
/// against each other. max_order < 0 picks 12 (r <= 2), 6 (r == 3), else 4.
SpectralBasis build_basis(const GroundState& gs, int max_order = -1);

double eigenvalue_h(const SpectralBasis& basis, const MultiIndex& n);
double eigenvalue(const SpectralBasis& basis, const MultiIndex& n);

/// phi^h_n(x) = H^r_n(Z'(P_h_inf)^{-1/2} x) / sqrt(n!)
double eigenfunction_h(const SpectralBasis& basis, const MultiIndex& n, const VectorXd& x);

/// phi_n(x) = (det(P_inf^{-1} + Q_inf) / (2 pi)^r)^{1/4} h0(x) phi^h_n(x)
double eigenfunction(const SpectralBasis& basis, const GroundState& gs, const MultiIndex& n,
                     const VectorXd& x);

/// Truncated conjugated kernel sum_{|n| <= M} e^{-l_n^h t} phi^h_n(x) phi^h_n(y)
/// times the stationary density at y.
double kernel_truncated(const SpectralBasis& basis, const GroundState& gs, double t,
                        const VectorXd& x, const VectorXd& y, int max_order = -1);

/// Exact conjugated transition density N(e^{t drift_h} x, phi^h_t(0)) at y.
double exact_h_kernel(const GroundState& gs, double t, const VectorXd& x, const VectorXd& y);

/// Full propagator density via conjugation:
/// e^{-lambda0 t} h0(x) k^h_t(x, y) / h0(y).
double propagator_density(const GroundState& gs, double t, const VectorXd& x,
                          const VectorXd& y);

/// Closed hyperbolic-form propagator density of the unit-frequency model
/// (A = 0, R = S^{-1}).
double mehler_propagator_density(const MatrixXd& S, double t, const VectorXd& x,
                                 const VectorXd& y);

struct MehlerReport {
  double max_series_error;      // truncated series vs exact conjugated kernel
  double max_propagator_error;  // hyperbolic form vs conjugated propagator
  int max_order;
  int grid_points;
};

/// Two-sided check on the tensor grid {-half, ..., half}^r x same for y.
MehlerReport mehler_check(const MatrixXd& S, double t, double grid_half, int grid_n, int M);

/// Applies e^{-i lambda_n t} (real time) or e^{-lambda_n t} (imaginary time)
/// to coefficients listed in basis.indices order.
std::vector<std::complex<double>> schrodinger_evolve(
    const SpectralBasis& basis, const std::vector<std::complex<double>>& coeffs, double t,
    bool real_time);

struct PoincareRow {
  double t;
  double lhs;  // ||K_t f - mean||^2 on coefficients
  double rhs;  // e^{-2 rate_1 t} ||f - mean||^2
};

struct PoincareReport {
  std::vector<PoincareRow> rows;
  bool holds;
};

PoincareReport poincare_check(const SpectralBasis& basis, const VectorXd& f_coeffs,
                              const std::vector<double>& ts);

}  // namespace fkqho
