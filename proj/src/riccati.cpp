#include "fkqho/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fkqho {

namespace {

using Complex = std::complex<double>;

MatrixXd ricc_map(const MatrixXd& A, const MatrixXd& R, const MatrixXd& S,
                  const MatrixXd& P) {
  return A * P + P * A.transpose() + R - P * S * P;
}

// Swap the diagonal entries at (p, p+1) of an upper-triangular T by a
// unitary similarity, accumulating into U.
void swap_schur_entries(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, Eigen::Index p) {
  const Complex t11 = T(p, p), t12 = T(p, p + 1), t22 = T(p + 1, p + 1);
  if (std::abs(t22 - t11) == 0.0) return;
  Eigen::JacobiRotation<Complex> g;
  g.makeGivens(t12, t22 - t11);
  T.applyOnTheLeft(p, p + 1, g.adjoint());
  T.applyOnTheRight(p, p + 1, g);
  U.applyOnTheRight(p, p + 1, g);
  T(p + 1, p) = Complex(0, 0);
}

// Ordered Schur: bring eigenvalues with select(lambda) = true to the leading
// diagonal positions, returning how many were selected.
Eigen::Index reorder_schur(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U,
                           const std::function<bool(Complex)>& select) {
  const Eigen::Index n = T.rows();
  Eigen::Index target = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!select(T(k, k))) continue;
    for (Eigen::Index j = k; j > target; --j) swap_schur_entries(T, U, j - 1);
    ++target;
  }
  return target;
}

// Invariant-subspace solution of the fixed point equation, one sign at a time.
MatrixXd hamiltonian_subspace_solution(const ModelParams& p, bool stable) {
  const Eigen::Index r = p.r;
  MatrixXd H(2 * r, 2 * r);
  H.topLeftCorner(r, r) = p.A.transpose();
  H.topRightCorner(r, r) = -p.S;
  H.bottomLeftCorner(r, r) = -p.R;
  H.bottomRightCorner(r, r) = -p.A;

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(H.cast<Complex>());
  Eigen::MatrixXcd T = schur.matrixT();
  Eigen::MatrixXcd U = schur.matrixU();

  Eigen::Index n_stable = 0;
  for (Eigen::Index i = 0; i < 2 * r; ++i)
    if (T(i, i).real() < 0.0) ++n_stable;
  if (n_stable != r) {
    std::ostringstream os;
    os << "solve_care: Hamiltonian spectrum does not split " << r << "/" << r
       << " across the imaginary axis; eigenvalues:";
    for (Eigen::Index i = 0; i < 2 * r; ++i)
      os << " (" << T(i, i).real() << (T(i, i).imag() < 0 ? "" : "+") << T(i, i).imag()
         << "i)";
    throw std::runtime_error(os.str());
  }

  auto select = stable ? std::function<bool(Complex)>([](Complex z) { return z.real() < 0.0; })
                       : std::function<bool(Complex)>([](Complex z) { return z.real() > 0.0; });
  reorder_schur(T, U, select);

  Eigen::MatrixXcd U1 = U.block(0, 0, r, r);
  Eigen::MatrixXcd U2 = U.block(r, 0, r, r);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(U1);
  if (!lu.isInvertible())
    throw std::runtime_error("solve_care: invariant subspace basis is singular");
  return sym((U2 * lu.inverse()).real());
}

// Newton sweeps on Ricc(P) = 0; stops as soon as the residual stops improving.
MatrixXd newton_refine(const MatrixXd& A, const MatrixXd& R, const MatrixXd& S,
                       MatrixXd P, int max_sweeps = 5) {
  double best = ricc_map(A, R, S, P).norm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const MatrixXd res = ricc_map(A, R, S, P);
    const MatrixXd M = A - P * S;
    MatrixXd step;
    try {
      step = solve_lyapunov(M, res);
    } catch (const std::exception&) {
      break;
    }
    const MatrixXd candidate = sym(P + step);
    const double cand_res = ricc_map(A, R, S, candidate).norm();
    if (cand_res >= best) break;
    P = candidate;
    best = cand_res;
  }
  return P;
}

void finish_solution(RiccatiSolution& sol) {
  const Eigen::Index r = sol.r;
  sol.Q_inf = sym(-sol.P_inf_minus.partialPivLu().solve(MatrixXd::Identity(r, r)));
  sol.Q_inf_minus = sym(-sol.P_inf.partialPivLu().solve(MatrixXd::Identity(r, r)));
  sol.drift_filter = sol.A - sol.P_inf * sol.S;
  sol.drift_h = sol.A - sol.R * sol.Q_inf;
  sol.lambda0 = 0.5 * (sol.S * sol.P_inf).trace();

  if (spectral_abscissa(sol.drift_filter) >= 0.0)
    throw std::runtime_error("solve_care: A - P_inf S is not Hurwitz");
  if (spectral_abscissa(sol.drift_h) >= 0.0)
    throw std::runtime_error("solve_care: A - R Q_inf is not Hurwitz");

  sol.Delta_inf = sym(solve_sylvester(sol.drift_filter.transpose(), sol.drift_filter, sol.S));
  sol.Delta_inf_h = sym(solve_sylvester(sol.drift_h, sol.drift_h.transpose(), sol.R));

  const double scale = 1.0 + std::abs(sol.lambda0);
  const double via_q = 0.5 * (sol.R * sol.Q_inf).trace();
  const double via_minus = sol.A.trace() - 0.5 * (sol.S * sol.P_inf_minus).trace();
  if (std::abs(sol.lambda0 - via_q) > 1e-8 * scale ||
      std::abs(sol.lambda0 - via_minus) > 1e-8 * scale)
    throw std::runtime_error("solve_care: trace identities violated beyond tolerance");

  const double res_p = care_residual(sol.A, sol.R, sol.S, sol.P_inf);
  const double res_m = care_residual(sol.A, sol.R, sol.S, sol.P_inf_minus);
  if (res_p > 1e-9 * std::max(1.0, sol.P_inf.norm()) ||
      res_m > 1e-9 * std::max(1.0, sol.P_inf_minus.norm()))
    throw std::runtime_error("solve_care: fixed point residual above tolerance");
}

}  // namespace

double care_residual(const MatrixXd& A, const MatrixXd& R, const MatrixXd& S,
                     const MatrixXd& P) {
  return ricc_map(A, R, S, P).norm();
}

RiccatiSolution solve_care(const ModelParams& params) {
  RiccatiSolution sol;
  sol.r = params.r;
  sol.A = params.A;
  sol.R = params.R;
  sol.S = params.S;
  sol.P_inf = newton_refine(params.A, params.R, params.S,
                            hamiltonian_subspace_solution(params, /*stable=*/true));
  sol.P_inf_minus = newton_refine(params.A, params.R, params.S,
                                  hamiltonian_subspace_solution(params, /*stable=*/false));
  finish_solution(sol);
  return sol;
}

RiccatiSolution reversible_fixed_points(const ModelParams& params) {
  if (!is_reversible(params))
    throw std::domain_error("reversible_fixed_points: model is not reversible");

  RiccatiSolution sol;
  sol.r = params.r;
  sol.A = params.A;
  sol.R = params.R;
  sol.S = params.S;

  const MatrixXd root = sqrt_positive_spectrum(params.A * params.A + params.R * params.S);
  Eigen::PartialPivLU<MatrixXd> rlu(params.R);
  const MatrixXd q_inf = sym(rlu.solve(params.A + root));
  const MatrixXd p_inf_inv = sym(rlu.solve(root - params.A));
  sol.P_inf = sym(p_inf_inv.partialPivLu().solve(MatrixXd::Identity(sol.r, sol.r)));
  sol.P_inf_minus = sym(-q_inf.partialPivLu().solve(MatrixXd::Identity(sol.r, sol.r)));
  finish_solution(sol);
  // The exact drift is -(A^2 + RS)^{1/2}; keep the closed form.
  sol.drift_h = -root;
  return sol;
}

RiccatiSolution dual(const RiccatiSolution& s) {
  RiccatiSolution d;
  d.r = s.r;
  d.A = s.A.transpose();
  d.R = s.S;
  d.S = s.R;
  d.P_inf = s.Q_inf;
  d.P_inf_minus = s.Q_inf_minus;
  d.Q_inf = s.P_inf;
  d.Q_inf_minus = s.P_inf_minus;
  d.Delta_inf = s.Delta_inf_h;
  d.Delta_inf_h = s.Delta_inf;
  d.drift_filter = s.drift_h.transpose();
  d.drift_h = s.drift_filter.transpose();
  d.lambda0 = s.lambda0;
  return d;
}

MatrixXd gramian_delta(const RiccatiSolution& sol, double t) {
  if (t < 0.0) throw std::domain_error("gramian_delta: t must be nonnegative");
  const MatrixXd e = expm(sol.drift_filter, t);
  return sym(sol.Delta_inf - e.transpose() * sol.Delta_inf * e);
}

MatrixXd gramian_delta_h(const RiccatiSolution& sol, double t) {
  if (t < 0.0) throw std::domain_error("gramian_delta_h: t must be nonnegative");
  const MatrixXd e = expm(sol.drift_h, t);
  return sym(sol.Delta_inf_h - e * sol.Delta_inf_h * e.transpose());
}

MatrixXd f_map(const RiccatiSolution& sol, const MatrixXd& P, double t) {
  return MatrixXd::Identity(sol.r, sol.r) + (P - sol.P_inf) * gramian_delta(sol, t);
}

double f_map_condition(const RiccatiSolution& sol, const MatrixXd& P, double t) {
  const MatrixXd f = f_map(sol, P, t);
  Eigen::JacobiSVD<MatrixXd> svd(f);
  const double cond =
      svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e14))
    throw std::runtime_error("f_map: numerically singular, condition number " +
                             std::to_string(cond));
  return cond;
}

MatrixXd semigroup_E(const RiccatiSolution& sol, const MatrixXd& P, double t) {
  const MatrixXd f = f_map(sol, P, t);
  // Right-solve e^{t drift} f^{-1} via the transposed system.
  return expm(sol.drift_filter, t) *
         f.transpose().partialPivLu().solve(MatrixXd::Identity(sol.r, sol.r)).transpose();
}

MatrixXd riccati_flow(const RiccatiSolution& sol, const MatrixXd& P, double t) {
  const MatrixXd e = expm(sol.drift_filter, t);
  const MatrixXd g = f_map(sol, P, t).partialPivLu().solve(P - sol.P_inf);
  return sym(sol.P_inf + e * g * e.transpose());
}

MatrixXd delta0(const RiccatiSolution& sol, double t) {
  if (t < 0.0) throw std::domain_error("delta0: t must be nonnegative");
  const Eigen::Index r = sol.r;
  if (t == 0.0) return MatrixXd::Zero(r, r);
  // The integral solves the dual flow from zero. Propagate it through the
  // linear-fractional representation d/dt [X;Y] = [[-A, R],[S, A']][X;Y],
  // Sigma = Y X^{-1}, in chunks short enough to keep X well conditioned.
  // This stays accurate even when the dual fixed point is enormous (barely
  // controllable models), where a fixed-point-anchored evaluation cancels.
  MatrixXd h(2 * r, 2 * r);
  h.topLeftCorner(r, r) = -sol.A;
  h.topRightCorner(r, r) = sol.R;
  h.bottomLeftCorner(r, r) = sol.S;
  h.bottomRightCorner(r, r) = sol.A.transpose();
  const int chunks =
      std::max(1, static_cast<int>(std::ceil(t * std::max(1.0, h.norm()))));
  const MatrixXd e = expm(h, t / chunks);
  const MatrixXd w11 = e.topLeftCorner(r, r), w12 = e.topRightCorner(r, r);
  const MatrixXd w21 = e.bottomLeftCorner(r, r), w22 = e.bottomRightCorner(r, r);
  MatrixXd sigma = MatrixXd::Zero(r, r);
  for (int k = 0; k < chunks; ++k) {
    const MatrixXd denom = w11 + w12 * sigma;
    sigma = sym((w21 + w22 * sigma) *
                denom.partialPivLu().solve(MatrixXd::Identity(r, r)));
  }
  return sigma;
}

DecayConstants decay_constants(const RiccatiSolution& sol, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("decay_constants: delta must be positive");
  DecayConstants dc;
  dc.delta = delta;

  auto coppel = [&](const MatrixXd& m, double& alpha, double& beta) {
    const double mu = log_norm(m);
    if (mu < 0.0) {
      alpha = 1.0;
      beta = -mu;
      return;
    }
    const double sigma = spectral_abscissa(m);
    if (sigma >= 0.0)
      throw std::domain_error("decay_constants: drift matrix is not Hurwitz");
    const double a = 2.0 * spectral_norm(m) / std::abs(sigma);
    alpha = std::pow(2.0 * a, static_cast<double>(sol.r - 1));
    beta = 0.5 * std::abs(sigma);
  };
  coppel(sol.drift_filter, dc.alpha, dc.beta);
  coppel(sol.drift_h, dc.alpha_h, dc.beta_h);

  // iota_h on [0, T] plus the exponential tail bound; the sum never exceeds
  // alpha_h^2 / (2 beta_h) because the integrand obeys the same envelope.
  const double tail_T =
      std::max(1.0, std::log(dc.alpha_h * dc.alpha_h / (2.0 * dc.beta_h * 1e-14)) /
                        (2.0 * dc.beta_h));
  auto norm2 = [&](double s) {
    const double n = spectral_norm(expm(sol.drift_h, s));
    return n * n;
  };
  dc.iota_h = adaptive_quadrature(norm2, 0.0, tail_T, 1e-12) +
              dc.alpha_h * dc.alpha_h * std::exp(-2.0 * dc.beta_h * tail_T) /
                  (2.0 * dc.beta_h);

  const MatrixXd delta_gram = gramian_delta(sol, delta);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_d(delta_gram), es_m(MatrixXd(-sol.P_inf_minus));
  const double lmin_d = es_d.eigenvalues().minCoeff();
  const double lmin_m = es_m.eigenvalues().minCoeff();
  if (lmin_d <= 0.0 || lmin_m <= 0.0)
    throw std::runtime_error("decay_constants: Gramian or -P_inf_minus not positive");
  dc.chi_delta = 1.0 / (lmin_d * lmin_m);

  dc.Pi_minus_delta = riccati_flow(sol, MatrixXd::Zero(sol.r, sol.r), delta);
  // Large-P limit of the flow at time delta: P_inf + E Delta_delta^{-1} E'.
  const MatrixXd e = expm(sol.drift_filter, delta);
  dc.Pi_plus_delta =
      sym(sol.P_inf + e * delta_gram.partialPivLu().solve(e.transpose()));
  return dc;
}

double entropy_bound_horizon(const DecayConstants& dc, Eigen::Index r, double n) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(dc.Pi_minus_delta);
  const double lmax_inv = 1.0 / es.eigenvalues().minCoeff();
  const double tr_inv = es.eigenvalues().cwiseInverse().sum();
  const double alpha_delta = dc.alpha * dc.chi_delta * dc.alpha * dc.chi_delta *
                             std::sqrt(static_cast<double>(r) * lmax_inv * tr_inv);
  return std::max(dc.delta, std::log(2.0 * std::max(1.0, n) * alpha_delta) / (2.0 * dc.beta));
}

LipschitzReport lipschitz_certificate(const RiccatiSolution& sol, double delta,
                                      int n_samples, std::uint64_t seed) {
  if (!(delta > 0.0))
    throw std::domain_error("lipschitz_certificate: delta must be positive");
  const DecayConstants dc = decay_constants(sol, delta);
  const Eigen::Index r = sol.r;

  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_psd = [&]() {
    MatrixXd g(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) g(i, j) = normal(gen);
    return MatrixXd(g * g.transpose() / static_cast<double>(r));
  };
  auto random_vec = [&]() {
    VectorXd v(r);
    for (Eigen::Index i = 0; i < r; ++i) v(i) = normal(gen);
    return v;
  };

  LipschitzReport report;
  report.all_hold = true;
  report.tightest_ratio = 0.0;
  report.mean_flow_tightest_ratio = 0.0;
  report.identity_residual = 0.0;

  const double horizon = std::max(10.0 * delta, 10.0 / dc.beta);
  const double k2 = dc.alpha * dc.chi_delta * dc.alpha * dc.chi_delta;
  for (int s = 0; s < n_samples; ++s) {
    const MatrixXd q1 = random_psd(), q2 = random_psd();
    const VectorXd x1 = random_vec(), x2 = random_vec();
    for (int it = 0; it <= 8; ++it) {
      const double t = delta + (horizon - delta) * it / 8.0;
      const MatrixXd p1 = riccati_flow(sol, q1, t), p2 = riccati_flow(sol, q2, t);
      const double lhs = spectral_norm(p1 - p2);
      const double rhs = k2 * std::exp(-2.0 * dc.beta * t) * spectral_norm(q1 - q2);
      report.samples.push_back({t, lhs, rhs});
      if (rhs > 0.0)
        report.tightest_ratio = std::max(report.tightest_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12) + 1e-14) report.all_hold = false;

      const VectorXd m1 = semigroup_E(sol, q1, t) * x1;
      const VectorXd m2 = semigroup_E(sol, q2, t) * x2;
      const double mean_lhs = (m1 - m2).norm();
      const double mean_rhs =
          dc.alpha * dc.chi_delta * std::exp(-dc.beta * t) *
          (dc.chi_delta * spectral_norm(sol.Delta_inf) * x1.norm() *
               spectral_norm(q1 - q2) +
           (x1 - x2).norm());
      if (mean_rhs > 0.0)
        report.mean_flow_tightest_ratio =
            std::max(report.mean_flow_tightest_ratio, mean_lhs / mean_rhs);
      if (mean_lhs > mean_rhs * (1.0 + 1e-12) + 1e-14) report.all_hold = false;

      // Exact factorization of the flow difference through both F maps.
      const MatrixXd e = expm(sol.drift_filter, t);
      const MatrixXd lhs_m = p1 - p2;
      const MatrixXd rhs_m =
          e * f_map(sol, q1, t).partialPivLu().solve(
                  MatrixXd((q1 - q2) *
                           f_map(sol, q2, t).transpose().partialPivLu().solve(e.transpose()))) ;
      report.identity_residual =
          std::max(report.identity_residual, (lhs_m - rhs_m).norm());
    }
  }
  return report;
}

}  // namespace fkqho
