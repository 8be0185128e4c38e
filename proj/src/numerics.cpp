#include "fkqho/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace fkqho {

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double log_norm(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(m));
  return es.eigenvalues().maxCoeff();
}

double spectral_abscissa(const MatrixXd& m) {
  Eigen::EigenSolver<MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

MatrixDiagnostics diagnostics(const MatrixXd& m) {
  MatrixDiagnostics d;
  d.spectral_norm = spectral_norm(m);
  d.frobenius_norm = m.norm();
  d.log_norm = log_norm(m);
  d.spectral_abscissa = spectral_abscissa(m);
  d.hurwitz = d.spectral_abscissa < 0.0;
  return d;
}

MatrixXd sqrt_psd(const MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(m));
  VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol * scale)
      throw std::domain_error("sqrt_psd: matrix has eigenvalue " + std::to_string(ev(i)) +
                              " below the PSD tolerance");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Denman-Beavers iteration; converges for spectra avoiding (-inf, 0].
MatrixXd sqrt_denman_beavers(const MatrixXd& m) {
  const Eigen::Index n = m.rows();
  MatrixXd y = m, z = MatrixXd::Identity(n, n);
  for (int it = 0; it < 100; ++it) {
    MatrixXd yn = 0.5 * (y + z.inverse());
    MatrixXd zn = 0.5 * (z + y.inverse());
    double delta = (yn - y).norm();
    y = yn;
    z = zn;
    if (delta <= 1e-14 * std::max(1.0, y.norm())) break;
  }
  return y;
}

}  // namespace

MatrixXd sqrt_positive_spectrum(const MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("sqrt_positive_spectrum: matrix not square");
  Eigen::EigenSolver<MatrixXd> es(m);
  const double scale = std::max(1.0, m.norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (es.eigenvalues()(i).real() <= 1e-12 * scale)
      throw std::domain_error(
          "sqrt_positive_spectrum: eigenvalue with nonpositive real part: " +
          std::to_string(es.eigenvalues()(i).real()));
  }
  Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::VectorXcd d = es.eigenvalues().cwiseSqrt();
  MatrixXd root = (v * d.asDiagonal() * v.inverse()).real();
  if ((root * root - m).norm() > 1e-9 * scale) {
    root = sqrt_denman_beavers(m);  // eigenbasis too ill-conditioned
    if ((root * root - m).norm() > 1e-9 * scale)
      throw std::domain_error("sqrt_positive_spectrum: residual above tolerance");
  }
  return root;
}

MatrixXd expm(const MatrixXd& m, double t) {
  if (!m.allFinite() || !std::isfinite(t))
    throw std::domain_error("expm: nonfinite input");
  return MatrixXd((t * m).exp());
}

Eigen::Index svd_rank(const MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thresh = static_cast<double>(std::min(m.rows(), m.cols())) * sv(0) * rel_tol;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return rank;
}

MatrixXd solve_sylvester(const MatrixXd& M, const MatrixXd& N, const MatrixXd& C) {
  const Eigen::Index p = M.rows(), q = N.cols();
  if (M.cols() != p || N.rows() != q || C.rows() != p || C.cols() != q)
    throw std::invalid_argument("solve_sylvester: incompatible dimensions");
  // vec(MX + XN) = (I (x) M + N' (x) I) vec(X), column-major vec.
  MatrixXd K = MatrixXd::Zero(p * q, p * q);
  for (Eigen::Index j = 0; j < q; ++j)
    K.block(j * p, j * p, p, p) += M;
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index k = 0; k < q; ++k)
      K.block(j * p, k * p, p, p).diagonal().array() += N(k, j);
  VectorXd rhs = -Eigen::Map<const VectorXd>(C.data(), p * q);
  VectorXd x = K.partialPivLu().solve(rhs);
  return Eigen::Map<const MatrixXd>(x.data(), p, q);
}

MatrixXd solve_lyapunov(const MatrixXd& M, const MatrixXd& C) {
  return solve_sylvester(M, M.transpose(), C);
}

namespace {

VectorXd rk4_endpoint(const std::function<VectorXd(double, const VectorXd&)>& f,
                      const VectorXd& y0, double t0, double t1, int steps,
                      std::vector<double>* ts, std::vector<VectorXd>* ys) {
  const double h = (t1 - t0) / steps;
  VectorXd y = y0;
  double t = t0;
  if (ts) {
    ts->push_back(t);
    ys->push_back(y);
  }
  for (int k = 0; k < steps; ++k) {
    VectorXd k1 = f(t, y);
    VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    VectorXd k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (k + 1) * h;
    if (!y.allFinite()) throw std::domain_error("integrate_ode: state became nonfinite");
    if (ts) {
      ts->push_back(t);
      ys->push_back(y);
    }
  }
  return y;
}

}  // namespace

OdePath integrate_ode(const std::function<VectorXd(double, const VectorXd&)>& f,
                      const VectorXd& y0, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_ode: steps must be >= 1");
  if (!y0.allFinite()) throw std::domain_error("integrate_ode: nonfinite initial state");
  OdePath path;
  path.richardson_error = 0.0;
  VectorXd fine = rk4_endpoint(f, y0, t0, t1, 2 * steps, nullptr, nullptr);
  VectorXd coarse = rk4_endpoint(f, y0, t0, t1, steps, &path.t, &path.y);
  path.richardson_error = (fine - coarse).norm() / 15.0;
  return path;
}

MatrixXd matrix_quadrature(const std::function<MatrixXd(double)>& g, double a, double b,
                           int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  MatrixXd acc = g(a) + g(b);
  for (int k = 1; k < panels; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * g(a + k * h);
  return (h / 3.0) * acc;
}

double scalar_quadrature(const std::function<double(double)>& g, double a, double b,
                         int panels) {
  auto wrap = [&](double s) { return MatrixXd::Constant(1, 1, g(s)); };
  return matrix_quadrature(wrap, a, b, panels)(0, 0);
}

namespace {

double adaptive_step(const std::function<double(double)>& g, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& g, double a, double b,
                           double tol) {
  const double m = 0.5 * (a + b);
  const double fa = g(a), fm = g(m), fb = g(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(g, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace fkqho
