#include "fkqho/flow.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fkqho {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int auto_panels(double t, int requested, int per_unit, int floor_panels) {
  if (requested > 0) return requested + (requested % 2);
  int p = std::max(floor_panels, static_cast<int>(std::ceil(t * per_unit)));
  return p + (p % 2);
}

bool positive_definite(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(sym(m));
  return llt.info() == Eigen::Success;
}

double mean_potential(const RiccatiSolution& sol, const GaussianState& g) {
  return 0.5 * (g.mean.dot(sol.S * g.mean) + (sol.S * g.cov).trace());
}

}  // namespace

GaussianState propagate_state(const RiccatiSolution& sol, const GaussianState& eta0,
                              double t) {
  if (t < 0.0) throw std::domain_error("propagate_state: t must be nonnegative");
  return {semigroup_E(sol, eta0.cov, t) * eta0.mean, riccati_flow(sol, eta0.cov, t)};
}

GaussianState propagate_state_alt(const RiccatiSolution& sol, const GaussianState& eta0,
                                  double t) {
  if (t < 0.0) throw std::domain_error("propagate_state_alt: t must be nonnegative");
  const Eigen::Index r = sol.r;
  const MatrixXd d0 = delta0(sol, t);
  const MatrixXd e0 = semigroup_E(sol, MatrixXd::Zero(r, r), t);
  // (P^{-1} + Delta)^{-1} P^{-1} = (I + P Delta)^{-1}, defined for singular P.
  Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(r, r) + eta0.cov * d0);
  const VectorXd mean = e0 * lu.solve(eta0.mean);
  const MatrixXd cov = riccati_flow(sol, MatrixXd::Zero(r, r), t) +
                       e0 * lu.solve(eta0.cov) * e0.transpose();
  return {mean, sym(cov)};
}

FlowState propagate(const RiccatiSolution& sol, const GroundState& gs,
                    const GaussianState& eta0, double t, int panels) {
  FlowState fs;
  fs.t = t;
  fs.eta_t = propagate_state(sol, eta0, t);
  if (t == 0.0) {
    fs.log_mass = 0.0;
  } else {
    auto integrand = [&](double s) {
      return mean_potential(sol, propagate_state(sol, eta0, s));
    };
    fs.log_mass = -scalar_quadrature(integrand, 0.0, t, auto_panels(t, panels, 128, 256));
  }
  if (positive_definite(fs.eta_t.cov)) {
    fs.eta_h_t = bg_transform(gs, fs.eta_t, +1);
  } else {
    fs.eta_h_t = fs.eta_t;  // reweighting a point mass leaves it unchanged
  }
  return fs;
}

SurvivalResult survival_probability(const RiccatiSolution& sol, const GroundState& gs,
                                    const GaussianState& eta0, double t, int panels) {
  if (!(t > 0.0)) throw std::domain_error("survival_probability: t must be positive");
  const FlowState fs = propagate(sol, gs, eta0, t, panels);
  return {fs.log_mass, std::exp(fs.log_mass), -fs.log_mass / t};
}

KtResult kt_function(const RiccatiSolution& sol, const GroundState& gs, double t,
                     const VectorXd& x, int panels) {
  if (!(t > 0.0)) throw std::domain_error("kt_function: t must be positive");
  const Eigen::Index r = sol.r;
  const int np = auto_panels(t, panels, 256, 512);

  // Route one: quadratures against the semigroup started from a point mass.
  const MatrixXd zero = MatrixXd::Zero(r, r);
  auto gram_integrand = [&](double s) {
    const MatrixXd e = semigroup_E(sol, zero, s);
    return MatrixXd(e.transpose() * sol.S * e);
  };
  const MatrixXd d0 = matrix_quadrature(gram_integrand, 0.0, t, np);
  auto trace_integrand = [&](double s) {
    return (sol.S * riccati_flow(sol, zero, s)).trace();
  };
  const double trace_term = scalar_quadrature(trace_integrand, 0.0, t, np);
  const double log_form_a = sol.lambda0 * t - 0.5 * x.dot(d0 * x) - 0.5 * trace_term;

  // Route two: determinant/quadratic closed form. Both the determinant ratio
  // det(I + phi Q) / det(I + P_inf Q) and the reweighting exponent
  // xhat' Q (I + phi Q)^{-1} xhat collapse onto the negative fixed point:
  // (I + phi Q) = (phi - P_inf_minus) Q, so the huge Q of a barely
  // controllable model cancels exactly.
  const MatrixXd phi0 = riccati_flow(sol, zero, t);
  const MatrixXd id = MatrixXd::Identity(r, r);
  auto logdet_spd = [&](const MatrixXd& m) {
    Eigen::LLT<MatrixXd> llt(sym(m));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("kt_function: expected positive definite matrix");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) acc += 2.0 * std::log(llt.matrixL()(i, i));
    return acc;
  };
  const MatrixXd gap_t = sym(phi0 - sol.P_inf_minus);
  const MatrixXd gap_inf = sym(sol.P_inf - sol.P_inf_minus);
  const VectorXd xhat = semigroup_E(sol, zero, t) * x;
  const VectorXd w = gap_t.ldlt().solve(xhat);
  const double log_kt =
      0.5 * (logdet_spd(gap_t) - logdet_spd(gap_inf)) + 0.5 * xhat.dot(w);
  const double log_eta_h0 =
      -0.5 * (logdet_spd(gap_inf) +
              std::log(MatrixXd(sol.Q_inf).partialPivLu().determinant()));

  KtResult res;
  res.k_t = std::exp(log_kt);
  res.form_a = std::exp(log_form_a);
  res.form_b = std::exp(log_h0(gs, x) + log_kt - log_eta_h0);
  return res;
}

EntropyDecayReport entropy_decay_report(const GroundState& gs, const GaussianState& eta0_h,
                                        double T, int steps, double fd_step) {
  if (!(T > 0.0) || steps < 1)
    throw std::invalid_argument("entropy_decay_report: need T > 0 and steps >= 1");
  if (!positive_definite(eta0_h.cov))
    throw std::domain_error("entropy_decay_report: initial law must be nondegenerate");

  const DecayConstants dc = decay_constants(gs.sol);
  auto ent_at = [&](double s) {
    return gaussian_kl(h_process_moments(gs, eta0_h, s), gs.eta_h_inf);
  };
  auto fisher_at = [&](double s) {
    return gaussian_fisher(h_process_moments(gs, eta0_h, s), gs.eta_h_inf);
  };

  EntropyDecayReport report;
  report.fd_step = fd_step;
  report.decays_hold = true;
  const double ent0 = ent_at(0.0);
  const double fisher0 = fisher_at(0.0);
  const double tol = 1e-9;

  for (int k = 0; k <= steps; ++k) {
    const double t = T * k / steps;
    EntropyDecayRow row;
    row.t = t;
    row.ent = ent_at(t);
    row.fisher = fisher_at(t);
    row.fisher_weighted =
        gaussian_fisher_weighted(h_process_moments(gs, eta0_h, t), gs.eta_h_inf, gs.sol.R);
    if (t >= fd_step) {
      row.dent_fd = (ent_at(t + fd_step) - ent_at(t - fd_step)) / (2.0 * fd_step);
    } else {
      row.dent_fd = (-3.0 * ent_at(t) + 4.0 * ent_at(t + fd_step) -
                     ent_at(t + 2.0 * fd_step)) /
                    (2.0 * fd_step);
    }
    row.debruijn_residual = row.dent_fd + 0.5 * row.fisher;
    row.ent_bound = std::exp(-t / dc.iota_h) * ent0;
    const double envelope = dc.alpha_h * std::exp(-dc.beta_h * t);
    row.fisher_bound = envelope * envelope * fisher0;
    const double exact_envelope = spectral_norm(expm(gs.sol.drift_h, t));
    row.fisher_bound_exact = exact_envelope * exact_envelope * fisher0;
    row.lsi_ok = row.ent <= 0.5 * dc.iota_h * row.fisher * (1.0 + tol) + 1e-12;

    if (row.ent > row.ent_bound * (1.0 + tol) + 1e-12 ||
        row.fisher > row.fisher_bound * (1.0 + tol) + 1e-12 ||
        row.fisher > row.fisher_bound_exact * (1.0 + tol) + 1e-12 || !row.lsi_ok)
      report.decays_hold = false;
    report.rows.push_back(row);
  }
  return report;
}

StabilityReport stability_report(const RiccatiSolution& sol, const GaussianState& eta0,
                                 const GaussianState& mu0, double T, int steps,
                                 double delta) {
  if (!(T > 0.0) || steps < 1)
    throw std::invalid_argument("stability_report: need T > 0 and steps >= 1");
  const DecayConstants dc = decay_constants(sol, delta);
  const Eigen::Index r = sol.r;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(dc.Pi_minus_delta);
  const double lmax_inv = 1.0 / es.eigenvalues().minCoeff();
  const double tr_inv = es.eigenvalues().cwiseInverse().sum();
  const double k2 = dc.alpha * dc.chi_delta * dc.alpha * dc.chi_delta;
  const double alpha_delta = k2 * std::sqrt(static_cast<double>(r) * lmax_inv * tr_inv);
  const double dP = spectral_norm(eta0.cov - mu0.cov);
  const double dx = (eta0.mean - mu0.mean).norm();
  const double nx = eta0.mean.norm();
  const double nd = spectral_norm(sol.Delta_inf);

  StabilityReport report;
  report.beta = dc.beta;
  report.entropy_horizon = entropy_bound_horizon(dc, r, std::max(1.0, std::ceil(dP)));
  report.bounds_hold = true;

  std::vector<double> fit_tw, fit_logw2, fit_te, fit_logent;
  for (int k = 0; k <= steps; ++k) {
    const double t = T * k / steps;
    const GaussianState a = propagate_state(sol, eta0, t);
    const GaussianState b = propagate_state(sol, mu0, t);
    StabilityRow row;
    row.t = t;
    row.w2 = gaussian_w2(a, b);
    row.ent = (positive_definite(a.cov) && positive_definite(b.cov))
                  ? gaussian_kl(a, b)
                  : kNaN;

    if (t >= delta) {
      const double eb = std::exp(-dc.beta * t);
      row.w2_bound =
          dc.alpha * dc.chi_delta * eb *
          (dx + dc.chi_delta *
                    (nd * nx + dc.alpha * std::sqrt(static_cast<double>(r)) /
                                   (2.0 * std::sqrt(es.eigenvalues().minCoeff())) * eb) *
                    dP);
      if (row.w2 > row.w2_bound * (1.0 + 1e-9) + 1e-12) report.bounds_hold = false;
    } else {
      row.w2_bound = kNaN;
    }
    if (t >= report.entropy_horizon && std::isfinite(row.ent)) {
      row.ent_bound = (1.25 * alpha_delta * dP +
                       lmax_inv * k2 *
                           (dc.chi_delta * nd * dc.chi_delta * nd * nx * nx * dP * dP +
                            dx * dx)) *
                      std::exp(-2.0 * dc.beta * t);
      if (row.ent > row.ent_bound * (1.0 + 1e-9) + 1e-12) report.bounds_hold = false;
    } else {
      row.ent_bound = kNaN;
    }

    if (t >= 5.0 / dc.beta && t <= 10.0 / dc.beta) {
      if (row.w2 > 1e-300) {
        fit_tw.push_back(t);
        fit_logw2.push_back(std::log(row.w2));
      }
      if (std::isfinite(row.ent) && row.ent > 1e-300) {
        fit_te.push_back(t);
        fit_logent.push_back(std::log(row.ent));
      }
    }
    report.rows.push_back(row);
  }

  auto slope = [](const std::vector<double>& ts, const std::vector<double>& ys) {
    if (ts.size() < 2 || ts.size() != ys.size()) return kNaN;
    double mt = 0, my = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i];
      my += ys[i];
    }
    mt /= ts.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      num += (ts[i] - mt) * (ys[i] - my);
      den += (ts[i] - mt) * (ts[i] - mt);
    }
    return num / den;
  };
  report.fitted_w2_slope = slope(fit_tw, fit_logw2);
  report.fitted_ent_slope = slope(fit_te, fit_logent);
  return report;
}

}  // namespace fkqho
