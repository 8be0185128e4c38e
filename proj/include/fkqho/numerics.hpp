#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

// Shared dense-matrix numerics: norms, square roots, exponentials,
// Sylvester/Lyapunov solves, fixed-step RK4 and composite Simpson.
// Everything operates on Eigen double matrices; inputs are never mutated.

namespace fkqho {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double spectral_norm(const MatrixXd& m);
double log_norm(const MatrixXd& m);           // largest eigenvalue of the symmetric part
double spectral_abscissa(const MatrixXd& m);  // largest real part of the spectrum

struct MatrixDiagnostics {
  double spectral_norm;
  double frobenius_norm;
  double log_norm;
  double spectral_abscissa;
  bool hurwitz;
};

MatrixDiagnostics diagnostics(const MatrixXd& m);

/// Principal symmetric square root of a PSD matrix. Eigenvalues below
/// -tol*max(1,|lambda_max|) raise std::domain_error; small negatives clamp to 0.
MatrixXd sqrt_psd(const MatrixXd& m, double tol = 1e-10);

/// Square root of a (possibly non-symmetric) matrix whose spectrum lies in the
/// open right half-plane; the returned root has the same property.
MatrixXd sqrt_positive_spectrum(const MatrixXd& m);

/// e^{t m}
MatrixXd expm(const MatrixXd& m, double t = 1.0);

/// Numerical rank: singular values below r * sigma_max * rel_tol count as zero.
Eigen::Index svd_rank(const MatrixXd& m, double rel_tol = 1e-12);

/// Solves M X + X N + C = 0 by the Kronecker-vectorized linear system.
MatrixXd solve_sylvester(const MatrixXd& M, const MatrixXd& N, const MatrixXd& C);

/// Solves M X + X M' + C = 0.
MatrixXd solve_lyapunov(const MatrixXd& M, const MatrixXd& C);

struct OdePath {
  std::vector<double> t;
  std::vector<VectorXd> y;
  double richardson_error;  // step-halving estimate of the endpoint error

  const VectorXd& back() const { return y.back(); }
};

/// Fixed-step dense RK4 for y' = f(t, y) on [t0, t1].
OdePath integrate_ode(const std::function<VectorXd(double, const VectorXd&)>& f,
                      const VectorXd& y0, double t0, double t1, int steps);

/// Composite Simpson for matrix-valued integrands, `panels` must be >= 2.
MatrixXd matrix_quadrature(const std::function<MatrixXd(double)>& g, double a, double b,
                           int panels);

double scalar_quadrature(const std::function<double(double)>& g, double a, double b,
                         int panels);

/// Recursive adaptive Simpson with absolute tolerance.
double adaptive_quadrature(const std::function<double(double)>& g, double a, double b,
                           double tol);

}  // namespace fkqho
