#include "fkqho/verify.hpp"

#include "fkqho/flow.hpp"
#include "fkqho/json_io.hpp"
#include "fkqho/particles.hpp"
#include "fkqho/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace fkqho {

namespace {

struct Suite {
  std::vector<VerifyResult> results;

  void check(const std::string& name, bool ok, double residual, double threshold) {
    std::ostringstream os;
    os << "residual " << residual << " vs " << threshold;
    results.push_back({name, ok, os.str()});
  }

  void residual(const std::string& name, double value, double threshold) {
    check(name, value <= threshold, value, threshold);
  }

  void run(const std::string& name, const std::function<void(Suite&)>& body) {
    try {
      body(*this);
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
};

VectorXd sample_point(StreamRng& rng, Eigen::Index r, double scale) {
  VectorXd x(r);
  for (Eigen::Index i = 0; i < r; ++i) x(i) = scale * rng.normal();
  return x;
}

MatrixXd sample_psd(StreamRng& rng, Eigen::Index r) {
  MatrixXd g(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) g(i, j) = rng.normal();
  return g * g.transpose() / static_cast<double>(r);
}

}  // namespace

std::vector<VerifyResult> run_verification(const ModelParams& params, bool full) {
  Suite suite;
  StreamRng rng(0x5eedULL, 7, 11);

  const ValidationReport vr = validate(params);
  suite.results.push_back(
      {"model: hypotheses", vr.passed, vr.passed ? "all checks pass" : "see cmd_validate"});
  if (!vr.passed) return suite.results;

  const MatrixDiagnostics diag = diagnostics(params.A);
  suite.check("model: norm chain on A",
              diag.spectral_norm >= diag.log_norm - 1e-12 &&
                  diag.log_norm >= diag.spectral_abscissa - 1e-12,
              diag.spectral_abscissa, diag.log_norm);

  RiccatiSolution sol = solve_care(params);
  const double scale_p = std::max(1.0, sol.P_inf.norm());
  suite.residual("riccati: Ricc(P_inf) = 0",
                 care_residual(params.A, params.R, params.S, sol.P_inf) / scale_p, 1e-9);
  suite.residual("riccati: dual equation in Q_inf",
                 care_residual(params.A.transpose(), params.S, params.R, sol.Q_inf) /
                     std::max(1.0, sol.Q_inf.norm()),
                 1e-9);
  suite.check("riccati: drift_filter Hurwitz", spectral_abscissa(sol.drift_filter) < 0.0,
              spectral_abscissa(sol.drift_filter), 0.0);
  suite.check("riccati: drift_h Hurwitz", spectral_abscissa(sol.drift_h) < 0.0,
              spectral_abscissa(sol.drift_h), 0.0);

  const double lam_scale = 1.0 + std::abs(sol.lambda0);
  suite.residual("riccati: Tr(SP) = Tr(RQ)",
                 std::abs((params.S * sol.P_inf).trace() - (params.R * sol.Q_inf).trace()) /
                     lam_scale,
                 1e-8);
  suite.residual(
      "riccati: Tr(SP) = 2Tr(A) - Tr(SP-)",
      std::abs((params.S * sol.P_inf).trace() -
               (2.0 * params.A.trace() - (params.S * sol.P_inf_minus).trace())) /
          lam_scale,
      1e-8);
  suite.residual("riccati: P gap is inverse Gramian",
                 (sol.P_inf - sol.P_inf_minus - sol.Delta_inf.partialPivLu().solve(
                                                    MatrixXd::Identity(sol.r, sol.r)))
                         .norm() /
                     scale_p,
                 1e-8);
  suite.residual("riccati: Q gap is inverse Gramian",
                 (sol.Q_inf - sol.Q_inf_minus - sol.Delta_inf_h.partialPivLu().solve(
                                                    MatrixXd::Identity(sol.r, sol.r)))
                         .norm() /
                     std::max(1.0, sol.Q_inf.norm()),
                 1e-8);

  suite.run("riccati: duality", [&](Suite& s) {
    const ModelParams dual_params(params.A.transpose(), sqrt_psd(sym(params.S), 1e-8),
                                  sym(params.R));
    const RiccatiSolution dsol = solve_care(dual_params);
    s.residual("riccati: duality (A,R,S)->(A',S,R)",
               (dsol.P_inf - sol.Q_inf).norm() / std::max(1.0, sol.Q_inf.norm()), 1e-8);
  });

  suite.run("riccati: flow", [&](Suite& s) {
    const MatrixXd p0 = sample_psd(rng, sol.r);
    const double t1 = full ? 1.3 : 0.7, t2 = full ? 0.9 : 0.4;
    s.residual("riccati: flow semigroup",
               (riccati_flow(sol, p0, t1 + t2) -
                riccati_flow(sol, riccati_flow(sol, p0, t2), t1))
                       .norm() /
                   scale_p,
               1e-8);
    s.residual("riccati: F(P_inf) = I",
               (f_map(sol, sol.P_inf, t1) - MatrixXd::Identity(sol.r, sol.r)).norm(), 1e-12);

    // RK4 oracle for the closed-form flow.
    const int steps = full ? 4000 : 1200;
    auto deriv = [&](double, const VectorXd& y) {
      const MatrixXd p = Eigen::Map<const MatrixXd>(y.data(), sol.r, sol.r);
      const MatrixXd d = params.A * p + p * params.A.transpose() + params.R -
                         p * params.S * p;
      return VectorXd(Eigen::Map<const VectorXd>(d.data(), sol.r * sol.r));
    };
    const VectorXd y0 = Eigen::Map<const VectorXd>(p0.data(), sol.r * sol.r);
    const OdePath path = integrate_ode(deriv, y0, 0.0, t1, steps);
    const MatrixXd rk = Eigen::Map<const MatrixXd>(path.back().data(), sol.r, sol.r);
    s.residual("riccati: closed form vs RK4", (riccati_flow(sol, p0, t1) - rk).norm(), 1e-6);
  });

  const GroundState gs = ground_state(sol);
  suite.residual("ground state: stationary conjugated covariance",
                 (gs.P_h_inf - sol.Delta_inf_h).norm() / std::max(1.0, gs.P_h_inf.norm()),
                 1e-8);
  suite.residual("ground state: Lyapunov residual",
                 (sol.drift_h * gs.P_h_inf + gs.P_h_inf * sol.drift_h.transpose() +
                  params.R)
                         .norm() /
                     std::max(1.0, params.R.norm()),
                 1e-9);
  {
    double worst = 0.0;
    for (int k = 0; k < (full ? 100 : 20); ++k) {
      const VectorXd x = sample_point(rng, sol.r, 2.0);
      worst = std::max(worst,
                       std::abs(eigen_residual(gs, x)) / (1.0 + x.squaredNorm()));
    }
    suite.residual("ground state: eigen residual", worst, 1e-8);
  }
  suite.run("ground state: reweighting chain", [&](Suite& s) {
    const GaussianState eta_h = bg_transform(gs, gs.eta_inf, +1);
    s.residual("ground state: stationary reweighting",
               (eta_h.cov - gs.eta_h_inf.cov).norm() + eta_h.mean.norm(), 1e-10);
    const GaussianState eta = {sample_point(rng, sol.r, 1.0),
                               MatrixXd(sample_psd(rng, sol.r) +
                                        MatrixXd::Identity(sol.r, sol.r))};
    const GaussianState fwd = bg_transform(gs, eta, +1);
    const GaussianState back = bg_transform(gs, fwd, -1);
    s.residual("ground state: reweighting round trip",
               (back.cov - eta.cov).norm() + (back.mean - eta.mean).norm(), 1e-10);
  });

  suite.run("flow: propagation", [&](Suite& s) {
    const double t = full ? 2.0 : 1.0;
    const GaussianState eta0{sample_point(rng, sol.r, 1.0), sample_psd(rng, sol.r)};
    const GaussianState a = propagate_state(sol, eta0, t);
    const GaussianState b = propagate_state_alt(sol, eta0, t);
    s.residual("flow: both closed forms agree",
               (a.cov - b.cov).norm() + (a.mean - b.mean).norm(), 1e-8);

    const FlowState fs = propagate(sol, gs, eta0, t);
    const GaussianState eta0_h = bg_transform(gs, eta0, +1);
    const GaussianState hm = h_process_moments(gs, eta0_h, t);
    s.residual("flow: reweighting commutes with time",
               (fs.eta_h_t.cov - hm.cov).norm() + (fs.eta_h_t.mean - hm.mean).norm(), 1e-8);

    const double lhs = fs.log_mass;
    const double rhs = -gs.lambda0 * t + log_quadratic_moment(eta0, sol.Q_inf) +
                       log_quadratic_moment(hm, MatrixXd(-sol.Q_inf));
    s.residual("flow: log mass vs conjugated route", std::abs(lhs - rhs), 1e-8);

    const SurvivalResult sv = survival_probability(sol, gs, gs.eta_inf, t);
    s.residual("flow: stationary survival rate", std::abs(sv.rate - gs.lambda0), 1e-10);

    const KtResult kt = kt_function(sol, gs, t, sample_point(rng, sol.r, 1.5));
    s.residual("flow: normalizer pair",
               std::abs(kt.form_a - kt.form_b) / std::max(1.0, std::abs(kt.form_b)), 1e-8);
  });

  if (is_reversible(params)) {
    suite.run("reversible: closed forms", [&](Suite& s) {
      const RiccatiSolution rsol = reversible_fixed_points(params);
      s.residual("reversible: fixed points match solver",
                 (rsol.P_inf - sol.P_inf).norm() / scale_p +
                     (rsol.Q_inf - sol.Q_inf).norm() / std::max(1.0, sol.Q_inf.norm()),
                 1e-8);
      const MatrixXd root =
          sqrt_positive_spectrum(params.A * params.A + params.R * params.S);
      s.residual("reversible: conjugated drift is -sqrt(A^2+RS)",
                 (sol.drift_h + root).norm() / std::max(1.0, root.norm()), 1e-8);
      const MatrixXd lhs = sol.Q_inf - params.R.partialPivLu().solve(params.A);
      const MatrixXd rhs =
          0.5 * MatrixXd(gs.P_h_inf.partialPivLu().solve(MatrixXd::Identity(sol.r, sol.r)));
      s.residual("reversible: precision identity", (lhs - rhs).norm() / rhs.norm(), 1e-8);

      const SpectralBasis basis = build_basis(gs, full ? -1 : 4);
      s.residual("spectral: Z orthogonal",
                 (basis.Z.transpose() * basis.Z - MatrixXd::Identity(sol.r, sol.r)).norm(),
                 1e-10);
      Eigen::EigenSolver<MatrixXd> es(params.A * params.A + params.R * params.S);
      VectorXd sq = es.eigenvalues().real();
      std::sort(sq.data(), sq.data() + sq.size());
      double worst = 0.0;
      for (Eigen::Index i = 0; i < sol.r; ++i)
        worst = std::max(worst, std::abs(basis.rates(i) * basis.rates(i) - sq(i)));
      s.residual("spectral: squared rates", worst / std::max(1.0, sq.maxCoeff()), 1e-8);

      if (sol.r <= 3) {
        // Generator applied by central differences against the eigenvalue.
        const auto indices = enumerate_multi_indices(static_cast<int>(sol.r), 3);
        const double step = 1e-4;
        double worst_fd = 0.0;
        for (const auto& n : indices) {
          if (n.order() == 0) continue;
          const VectorXd x = sample_point(rng, sol.r, 0.8);
          VectorXd grad(sol.r);
          MatrixXd hess(sol.r, sol.r);
          const double f0 = eigenfunction_h(basis, n, x);
          for (Eigen::Index i = 0; i < sol.r; ++i) {
            VectorXd e = VectorXd::Zero(sol.r);
            e(i) = step;
            const double fp = eigenfunction_h(basis, n, x + e);
            const double fm = eigenfunction_h(basis, n, x - e);
            grad(i) = (fp - fm) / (2 * step);
            hess(i, i) = (fp - 2 * f0 + fm) / (step * step);
            for (Eigen::Index j = i + 1; j < sol.r; ++j) {
              VectorXd ej = VectorXd::Zero(sol.r);
              ej(j) = step;
              const double fpp = eigenfunction_h(basis, n, x + e + ej);
              const double fpm = eigenfunction_h(basis, n, x + e - ej);
              const double fmp = eigenfunction_h(basis, n, x - e + ej);
              const double fmm = eigenfunction_h(basis, n, x - e - ej);
              hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4 * step * step);
            }
          }
          const double gen = (sol.drift_h * x).dot(grad) + 0.5 * (params.R * hess).trace();
          worst_fd = std::max(worst_fd, std::abs(gen + eigenvalue_h(basis, n) * f0));
        }
        s.residual("spectral: generator on eigenfunctions (FD)", worst_fd, 1e-5);
      }

      if (full && sol.r <= 3) {
        VectorXd nodes, weights;
        gauss_hermite(24, nodes, weights);
        const MatrixXd half = sqrt_psd(gs.P_h_inf) * basis.Z;
        double integral = 0.0;
        const VectorXd x0 = sample_point(rng, sol.r, 0.5);
        std::function<void(int, VectorXd&, double)> loop = [&](int dim, VectorXd& z,
                                                               double w) {
          if (dim == sol.r) {
            integral += w * kernel_truncated(basis, gs, 1.0, x0, half * z, basis.max_order) /
                        std::exp(gaussian_log_pdf(gs.eta_h_inf, half * z));
            return;
          }
          for (Eigen::Index q = 0; q < nodes.size(); ++q) {
            z(dim) = nodes(q);
            loop(dim + 1, z, w * weights(q));
          }
        };
        VectorXd z(sol.r);
        loop(0, z, 1.0);
        s.residual("spectral: kernel normalization", std::abs(integral - 1.0), 1e-6);
      }
    });
  }

  if (full) {
    suite.run("particles: determinism", [&](Suite& s) {
      const GaussianState eta0{VectorXd::Zero(params.r),
                               MatrixXd::Identity(params.r, params.r)};
      const Trajectory a = dmc_run(params, eta0, 64, 0.5, 0.01, 123);
      const Trajectory b = dmc_run(params, eta0, 64, 0.5, 0.01, 123);
      const bool same = trajectory_csv(a, params.r) == trajectory_csv(b, params.r);
      s.check("particles: seeded rerun is byte-identical", same, same ? 0.0 : 1.0, 0.0);
    });
    suite.run("particles: gain identity", [&](Suite& s) {
      double worst = 0.0;
      for (int k = 0; k < 10; ++k) {
        const VectorXd x = sample_point(rng, params.r, 1.0);
        const VectorXd xh = sample_point(rng, params.r, 1.0);
        const MatrixXd p = sample_psd(rng, params.r);
        const VectorXd fpf = params.A * x + fpf_gain(p, params.S, xh, x);
        const VectorXd drift2 = params.A * x - 0.5 * p * params.S * (x + xh);
        worst = std::max(worst, (fpf - drift2).norm());
      }
      s.residual("particles: feedback gain reproduces variant 2", worst, 1e-12);
    });
  }

  return suite.results;
}

}  // namespace fkqho
