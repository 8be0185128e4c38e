// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Randomized inputs come from fixed seeds so the run is replayable.

#include "test_util.hpp"

#include "fkqho/flow.hpp"
#include "fkqho/json_io.hpp"
#include "fkqho/particles.hpp"
#include "fkqho/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace fkqho;
using namespace fkqho::testing;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

ModelParams scalar_model(double a, double b, double s) {
  return ModelParams(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b),
                     MatrixXd::Constant(1, 1, s));
}

GaussianState g1(double m, double v) {
  return {VectorXd::Constant(1, m), MatrixXd::Constant(1, 1, v)};
}

std::vector<std::pair<ModelParams, RiccatiSolution>> care_sample;

void criterion_care(Outcome& out) {
  StreamRng rng(0xACCE01, 0, 0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ModelParams m = random_controllable_model(rng, 1 + k % 6);
    const RiccatiSolution sol = solve_care(m);
    const double rel =
        care_residual(m.A, m.R, m.S, sol.P_inf) / std::max(1.0, sol.P_inf.norm());
    worst = std::max(worst, rel);
    out.require(rel <= 1e-9, "residual " + std::to_string(rel) + " at sample " +
                                 std::to_string(k));
    out.require(spectral_abscissa(sol.drift_filter) < 0.0,
                "drift not Hurwitz at sample " + std::to_string(k));
    care_sample.emplace_back(m, sol);
  }
  out.detail << "max relative residual " << worst;
}

void criterion_traces(Outcome& out) {
  double worst = 0.0;
  for (const auto& [m, sol] : care_sample) {
    const double tsp = (m.S * sol.P_inf).trace();
    const double tol = 1e-8 * (1.0 + std::abs(tsp));
    const double gap_q = std::abs(tsp - (m.R * sol.Q_inf).trace());
    const double gap_minus =
        std::abs(tsp - (2.0 * m.A.trace() - (m.S * sol.P_inf_minus).trace()));
    worst = std::max(worst, std::max(gap_q, gap_minus) / (1.0 + std::abs(tsp)));
    out.require(gap_q <= tol && gap_minus <= tol, "trace identity violated");
  }
  out.detail << "max scaled trace gap " << worst;
}

void criterion_reversible(Outcome& out) {
  StreamRng rng(0xACCE03, 0, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ModelParams m = random_reversible_model(rng, 1 + k % 5);
    const RiccatiSolution closed = reversible_fixed_points(m);
    const RiccatiSolution solved = solve_care(m);
    auto rel = [](const MatrixXd& a, const MatrixXd& b) {
      return (a - b).norm() / std::max(1.0, b.norm());
    };
    const double gap = std::max({rel(closed.P_inf, solved.P_inf),
                                 rel(closed.P_inf_minus, solved.P_inf_minus),
                                 rel(closed.Q_inf, solved.Q_inf),
                                 rel(closed.Delta_inf_h, solved.Delta_inf_h)});
    worst = std::max(worst, gap);
    out.require(gap <= 1e-8, "closed form vs solver gap " + std::to_string(gap));
    const MatrixXd root = sqrt_positive_spectrum(m.A * m.A + m.R * m.S);
    out.require((solved.drift_h + root).norm() <= 1e-8 * std::max(1.0, root.norm()),
                "conjugated drift mismatch");
  }
  out.detail << "max closed-form gap " << worst;
}

void criterion_eigen_residual(Outcome& out) {
  StreamRng rng(0xACCE04, 0, 0);
  double worst = 0.0;
  for (int model_idx = 0; model_idx < 10; ++model_idx) {
    const ModelParams m = random_controllable_model(rng, 1 + model_idx % 6);
    const GroundState gs = ground_state(solve_care(m));
    for (int k = 0; k < 100; ++k) {
      const VectorXd x = random_vector(rng, m.r, 2.0);
      const double res = std::abs(eigen_residual(gs, x)) / (1.0 + x.squaredNorm());
      worst = std::max(worst, res);
      out.require(res <= 1e-8, "eigen residual " + std::to_string(res));
    }
  }
  out.detail << "max scaled residual " << worst;
}

void criterion_flow_oracle(Outcome& out) {
  StreamRng rng(0xACCE05, 0, 0);
  double worst_flow = 0.0, worst_semigroup = 0.0;
  for (int model_idx = 0; model_idx < 3; ++model_idx) {
    const ModelParams m = random_controllable_model(rng, 4);
    const RiccatiSolution sol = solve_care(m);
    const MatrixXd p0 =
        model_idx == 0 ? MatrixXd(MatrixXd::Identity(4, 4)) : random_psd(rng, 4);

    auto deriv = [&](double, const VectorXd& y) {
      const MatrixXd p = Eigen::Map<const MatrixXd>(y.data(), 4, 4);
      const MatrixXd d = m.A * p + p * m.A.transpose() + m.R - p * m.S * p;
      return VectorXd(Eigen::Map<const VectorXd>(d.data(), 16));
    };
    const int steps = 40000;
    const OdePath path = integrate_ode(
        deriv, Eigen::Map<const VectorXd>(p0.data(), 16), 0.0, 10.0, steps);
    for (int g = 0; g <= 20; ++g) {
      const double t = 0.5 * g;
      const MatrixXd oracle =
          Eigen::Map<const MatrixXd>(path.y[g * (steps / 20)].data(), 4, 4);
      const double gap = (riccati_flow(sol, p0, t) - oracle).cwiseAbs().maxCoeff();
      worst_flow = std::max(worst_flow, gap);
      out.require(gap <= 1e-6, "flow vs RK4 gap " + std::to_string(gap));
    }

    const MatrixXd q0 = random_psd(rng, 4);
    const MatrixXd direct = riccati_flow(sol, q0, 2.9);
    const MatrixXd composed = riccati_flow(sol, riccati_flow(sol, q0, 1.7), 1.2);
    const double sg = (direct - composed).norm() / std::max(1.0, direct.norm());
    worst_semigroup = std::max(worst_semigroup, sg);
    out.require(sg <= 1e-8, "semigroup residual " + std::to_string(sg));
  }
  out.detail << "max flow gap " << worst_flow << ", max semigroup residual "
             << worst_semigroup;
}

void criterion_mehler(Outcome& out) {
  const MehlerReport report = mehler_check(MatrixXd::Identity(1, 1), 1.0, 2.0, 21, 25);
  out.require(report.max_series_error <= 1e-6,
              "series error " + std::to_string(report.max_series_error));
  out.require(report.max_propagator_error <= 1e-10,
              "propagator error " + std::to_string(report.max_propagator_error));
  out.detail << "series " << report.max_series_error << ", propagator "
             << report.max_propagator_error;
}

void criterion_survival(Outcome& out) {
  const RiccatiSolution sol = solve_care(scalar_model(0, 1, 1));
  const GroundState gs = ground_state(sol);
  double worst = 0.0;
  for (double t = 0.5; t <= 8.0; t += 0.5) {
    const SurvivalResult sv = survival_probability(sol, gs, gs.eta_inf, t);
    worst = std::max(worst, std::abs(sv.rate - gs.lambda0));
    out.require(std::abs(sv.rate - gs.lambda0) <= 1e-10, "stationary rate drift");
  }
  const DecayConstants dc = decay_constants(sol);
  const SurvivalResult sv =
      survival_probability(sol, gs, GaussianState::dirac(VectorXd::Zero(1)), 10.0 / dc.beta);
  out.require(std::abs(sv.rate - gs.lambda0) <= 0.05,
              "point-mass rate gap " + std::to_string(std::abs(sv.rate - gs.lambda0)));
  out.detail << "max stationary gap " << worst << ", point-mass gap "
             << std::abs(sv.rate - gs.lambda0);
}

void criterion_kt(Outcome& out) {
  StreamRng rng(0xACCE08, 0, 0);
  double worst_pair = 0.0;

  std::vector<std::pair<RiccatiSolution, GroundState>> setups;
  {
    const RiccatiSolution s1 = solve_care(scalar_model(0, 1, 1));
    setups.emplace_back(s1, ground_state(s1));
    const ModelParams m2 = random_controllable_model(rng, 2);
    const RiccatiSolution s2 = solve_care(m2);
    setups.emplace_back(s2, ground_state(s2));
  }

  for (const auto& [sol, gs] : setups) {
    const DecayConstants dc = decay_constants(sol);

    std::vector<VectorXd> xs;
    for (int k = 0; k < 5; ++k) xs.push_back(random_vector(rng, sol.r, 1.2));
    xs.push_back(VectorXd::Zero(sol.r));

    for (double t : {0.5, 1.0, 2.0, 4.0})
      for (const auto& x : xs) {
        const KtResult kt = kt_function(sol, gs, t, x);
        const double gap =
            std::abs(kt.form_a - kt.form_b) / std::max(1.0, std::abs(kt.form_b));
        worst_pair = std::max(worst_pair, gap);
        out.require(gap <= 1e-8, "normalizer pair gap " + std::to_string(gap));
      }

    // Envelope: fit the constant on a dense geometric time grid, then verify
    // on interleaved midpoints (and on fresh directions with a generous
    // factor). A decay slower than e^{-2 beta t} grows through any constant
    // exponentially, so the slack does not blunt the check.
    auto needed_c = [&](double t, const VectorXd& x) {
      const KtResult kt = kt_function(sol, gs, t, x);
      const double gshape = std::exp(-2.0 * dc.beta * t);
      if (kt.k_t < 1.0) return -std::log(kt.k_t) / gshape;
      return std::log(kt.k_t) / (gshape * (1.0 + x.squaredNorm()));
    };
    const double t_lo = 0.5, t_hi = 10.0 / dc.beta;
    std::vector<double> fit_ts, mid_ts;
    for (int k = 0; k < 24; ++k)
      fit_ts.push_back(t_lo * std::pow(t_hi / t_lo, k / 23.0));
    for (std::size_t k = 0; k + 1 < fit_ts.size(); ++k)
      mid_ts.push_back(0.5 * (fit_ts[k] + fit_ts[k + 1]));

    double c_delta = 0.0;
    for (double t : fit_ts)
      for (const auto& x : xs) c_delta = std::max(c_delta, needed_c(t, x));
    std::vector<VectorXd> fresh_xs;
    for (int k = 0; k < 6; ++k) fresh_xs.push_back(random_vector(rng, sol.r, 1.0));
    auto check_envelope = [&](double t, const VectorXd& x, double slack) {
      const KtResult kt = kt_function(sol, gs, t, x);
      const double gshape = std::exp(-2.0 * dc.beta * t);
      const double c = slack * c_delta;
      out.require(kt.k_t >= std::exp(-c * gshape) * (1.0 - 1e-9) &&
                      kt.k_t <= std::exp(c * (1.0 + x.squaredNorm()) * gshape) *
                                    (1.0 + 1e-9),
                  "envelope breach at t=" + std::to_string(t));
    };
    for (double t : mid_ts) {
      for (const auto& x : xs) check_envelope(t, x, 1.25);
      for (const auto& x : fresh_xs) check_envelope(t, x, 2.0);
    }

    const KtResult late = kt_function(sol, gs, 30.0 / dc.beta, VectorXd::Zero(sol.r));
    out.require(std::abs(late.k_t - 1.0) <= 1e-8,
                "late normalizer " + std::to_string(late.k_t));
  }
  out.detail << "max pair gap " << worst_pair;
}

void criterion_entropy_suite(Outcome& out) {
  StreamRng rng(0xACCE09, 0, 0);

  std::vector<std::pair<GroundState, GaussianState>> cases;
  cases.emplace_back(ground_state(solve_care(scalar_model(0, 1, 1))), g1(1.0, 0.7));
  {
    const ModelParams m2 = random_reversible_model(rng, 2, /*unit_diffusion=*/true);
    GaussianState eta0{random_vector(rng, 2, 0.8),
                       MatrixXd(random_spd(rng, 2, 0.3))};
    cases.emplace_back(ground_state(reversible_fixed_points(m2)), eta0);
  }

  double worst_residual = 0.0;
  for (const auto& [gs, eta0] : cases) {
    const EntropyDecayReport report = entropy_decay_report(gs, eta0, 3.0, 30, 1e-3);
    out.require(report.decays_hold, "an exponential decay bound failed");
    for (const auto& row : report.rows) {
      worst_residual = std::max(worst_residual, std::abs(row.debruijn_residual));
      out.require(std::abs(row.debruijn_residual) <= 1e-4,
                  "de Bruijn residual " + std::to_string(row.debruijn_residual));
    }
  }
  out.detail << "max de Bruijn residual " << worst_residual;
}

void criterion_stability_rates(Outcome& out) {
  // Scalar case.
  {
    const RiccatiSolution sol = solve_care(scalar_model(0, 1, 1));
    const StabilityReport report =
        stability_report(sol, g1(1.0, 2.0), g1(0.0, 1.0), 10.5, 210);
    out.require(std::abs(report.fitted_w2_slope + report.beta) <= 0.15 * report.beta,
                "1d w2 slope " + std::to_string(report.fitted_w2_slope));
    out.require(
        std::abs(report.fitted_ent_slope + 2.0 * report.beta) <= 0.30 * report.beta,
        "1d ent slope " + std::to_string(report.fitted_ent_slope));
    out.require(report.bounds_hold, "1d certified bounds failed");
    out.detail << "1d slopes (" << report.fitted_w2_slope << ", "
               << report.fitted_ent_slope << ") vs beta " << report.beta;
  }

  // Two dimensions with a normal drift so the certified beta is sharp.
  {
    MatrixXd a(2, 2);
    a << -0.2, 0.4, 0.4, -0.6;
    const ModelParams m(a, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
    const RiccatiSolution sol = solve_care(m);
    const GaussianState eta0{(VectorXd(2) << 1.0, 0.6).finished(),
                             (MatrixXd(2, 2) << 1.5, 0.2, 0.2, 0.9).finished()};
    const GaussianState mu0{(VectorXd(2) << -0.4, 0.2).finished(),
                            MatrixXd::Identity(2, 2)};
    const double T = 10.5 / decay_constants(sol).beta;
    const StabilityReport report =
        stability_report(sol, eta0, mu0, T, 300);
    out.require(std::abs(report.fitted_w2_slope + report.beta) <= 0.15 * report.beta,
                "2d w2 slope " + std::to_string(report.fitted_w2_slope));
    out.require(
        std::abs(report.fitted_ent_slope + 2.0 * report.beta) <= 0.30 * report.beta,
        "2d ent slope " + std::to_string(report.fitted_ent_slope));
    out.require(report.bounds_hold, "2d certified bounds failed");
    out.detail << "; 2d slopes (" << report.fitted_w2_slope << ", "
               << report.fitted_ent_slope << ") vs beta " << report.beta;
  }
}

void criterion_dmc(Outcome& out) {
  const ModelParams m = scalar_model(0, 1, 1);
  const int n = 5000;
  double lambda_acc = 0.0, cov_acc = 0.0;
  for (int s = 0; s < 10; ++s) {
    const Trajectory traj = dmc_run(m, g1(0, 1), n, 20.0, 0.01, 9001 + s);
    lambda_acc += traj.lambda0_final;
    cov_acc += traj.cov.back()(0, 0);
  }
  const double lambda_mean = lambda_acc / 10.0, cov_mean = cov_acc / 10.0;
  out.require(std::abs(lambda_mean - 0.5) <= 0.05,
              "lambda estimate " + std::to_string(lambda_mean));
  out.require(std::abs(cov_mean - 1.0) <= 4.0 * std::sqrt(2.0 / n),
              "terminal covariance " + std::to_string(cov_mean));
  out.detail << "mean lambda " << lambda_mean << ", mean terminal cov " << cov_mean;
}

void criterion_enkf(Outcome& out) {
  StreamRng rng(0xACCE12, 0, 0);
  const int n = 2000;
  const double T = 5.0, dt = 0.01;

  std::vector<ModelParams> models;
  models.push_back(scalar_model(0, 1, 1));
  models.push_back(random_controllable_model(rng, 2));

  for (const auto& m : models) {
    const RiccatiSolution sol = solve_care(m);
    const GaussianState eta0{VectorXd::Constant(m.r, 0.5),
                             MatrixXd(0.8 * MatrixXd::Identity(m.r, m.r))};
    for (int variant : {1, 2, 3}) {
      int tracking = 0;
      for (int s = 0; s < 20; ++s) {
        const Trajectory traj =
            enkf_run(m, variant, eta0, n, T, dt, 77000 + 100 * variant + s);
        bool ok = true;
        for (int c = 1; c <= 5; ++c) {
          const double t = c * 1.0;
          const std::size_t k = static_cast<std::size_t>(t / dt);
          const GaussianState ref = propagate_state(sol, eta0, traj.t[k]);
          const double mean_env =
              4.0 * std::sqrt(spectral_norm(ref.cov) * double(m.r) / n);
          const double cov_env =
              4.0 * std::sqrt((ref.cov.trace() * ref.cov.trace() +
                               ref.cov.squaredNorm()) /
                              double(n - 1));
          if ((traj.mean[k] - ref.mean).norm() > mean_env) ok = false;
          if ((traj.cov[k] - ref.cov).norm() > cov_env) ok = false;
        }
        if (ok) ++tracking;
      }
      out.require(tracking >= 18, "variant " + std::to_string(variant) + " r=" +
                                      std::to_string(m.r) + " tracked only " +
                                      std::to_string(tracking) + "/20");
      out.detail << "v" << variant << "r" << m.r << ":" << tracking << "/20 ";
    }
  }

  // Gain identities, exact to near machine precision.
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index r = 1 + k % 3;
    const MatrixXd p = random_spd(rng, r, 0.4);
    const MatrixXd s_mat = random_spd(rng, r, 0.4);
    const MatrixXd a = random_matrix(rng, r, r);
    const VectorXd x = random_vector(rng, r), mean = random_vector(rng, r);
    const VectorXd via_gain = a * x + fpf_gain(p, s_mat, mean, x);
    const VectorXd variant2 = a * x - 0.5 * p * s_mat * (x + mean);
    worst = std::max(worst, (via_gain - variant2).norm());
    const MatrixXd r_mat = random_spd(rng, r, 0.4);
    const VectorXd variant3 = variant2 + 0.5 * r_mat * p.inverse() * (x - mean);
    const VectorXd direct = a * x - 0.5 * p * s_mat * (x + mean) +
                            (0.5 * r_mat) * p.inverse() * (x - mean);
    worst = std::max(worst, (variant3 - direct).norm());
  }
  out.require(worst <= 1e-12, "gain identity residual " + std::to_string(worst));
}

void criterion_backward(Outcome& out) {
  const ModelParams m = scalar_model(0, 1, 1);
  const RiccatiSolution sol = solve_care(m);
  const GroundState gs = ground_state(sol);
  const GaussianState eta0 = g1(0.7, 0.6);
  const double t = 2.0, s = 1.0;

  // Joint-Gaussian conditioning oracle at s = t/2.
  const GaussianState eta_h0 = bg_transform(gs, eta0, +1);
  const double a = sol.drift_h(0, 0), q = sol.Q_inf(0, 0);
  const GaussianState at_s = h_process_moments(gs, eta_h0, s);
  const GaussianState at_t = h_process_moments(gs, eta_h0, t);
  const double cross = at_s.cov(0, 0) * std::exp(a * (t - s));
  Eigen::Matrix2d sigma;
  sigma << at_s.cov(0, 0), cross, cross, at_t.cov(0, 0);
  Eigen::Vector2d mu(at_s.mean(0), at_t.mean(0));
  const Eigen::Matrix2d prec =
      sigma.inverse() - (Eigen::Matrix2d() << 0, 0, 0, q).finished();
  const Eigen::Matrix2d cov2 = prec.inverse();
  const Eigen::Vector2d mean2 = cov2 * (sigma.inverse() * mu);

  const BackwardMoments bm = backward_moments(sol, eta0, t, 0.0, 4000);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < bm.s.size(); ++k)
    if (std::abs(bm.s[k] - s) < std::abs(bm.s[idx] - s)) idx = k;
  const double mean_gap = std::abs(bm.mean_h[idx](0) - mean2(0));
  const double cov_gap = std::abs(bm.cov_h[idx](0, 0) - cov2(0, 0));
  out.require(mean_gap <= 1e-6 && cov_gap <= 1e-6,
              "moment gaps " + std::to_string(mean_gap) + ", " + std::to_string(cov_gap));

  const int n_paths = 10000;
  const BackwardSample bs = backward_sample(sol, eta0, t, 0.0, {s}, n_paths, 1e-3, 4242);
  const double mean_mc = bs.positions[0].col(0).mean();
  double var_mc = 0.0;
  for (int p = 0; p < n_paths; ++p)
    var_mc += (bs.positions[0](p, 0) - mean_mc) * (bs.positions[0](p, 0) - mean_mc);
  var_mc /= (n_paths - 1);
  const double se_mean = std::sqrt(cov2(0, 0) / n_paths);
  const double se_var = cov2(0, 0) * std::sqrt(2.0 / n_paths);
  out.require(std::abs(mean_mc - mean2(0)) <= 4.0 * se_mean + 2e-3,
              "sampled mean " + std::to_string(mean_mc));
  out.require(std::abs(var_mc - cov2(0, 0)) <= 4.0 * se_var + 2e-3,
              "sampled variance " + std::to_string(var_mc));
  out.detail << "moment gaps (" << mean_gap << ", " << cov_gap << "), sampled ("
             << std::abs(mean_mc - mean2(0)) << ", " << std::abs(var_mc - cov2(0, 0))
             << ")";
}

void criterion_determinism(Outcome& out) {
  const ModelParams m = scalar_model(0, 1, 1);
  const Trajectory d1 = dmc_run(m, g1(0, 1), 256, 1.0, 0.01, 31337);
  const Trajectory d2 = dmc_run(m, g1(0, 1), 256, 1.0, 0.01, 31337);
  out.require(trajectory_csv(d1, 1) == trajectory_csv(d2, 1), "dmc rerun differs");

  const Trajectory e1 = enkf_run(m, 2, g1(0, 1), 128, 1.0, 0.01, 4242);
  const Trajectory e2 = enkf_run(m, 2, g1(0, 1), 128, 1.0, 0.01, 4242);
  out.require(trajectory_csv(e1, 1) == trajectory_csv(e2, 1), "enkf rerun differs");

  const RiccatiSolution sol = solve_care(m);
  const BackwardSample b1 = backward_sample(sol, g1(0, 1), 1.0, 0.0, {0.5}, 64, 0.01, 7);
  const BackwardSample b2 = backward_sample(sol, g1(0, 1), 1.0, 0.0, {0.5}, 64, 0.01, 7);
  out.require((b1.positions[0] - b2.positions[0]).norm() == 0.0,
              "backward sampler rerun differs");
  out.detail << "dmc, enkf and backward reruns byte-identical";
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<void(Outcome&)> body;
    double budget_seconds;  // 0: covered by the global budget only
  };
  const std::vector<Entry> entries = {
      {1, "CARE correctness on 100 random controllable models", criterion_care, 5.0},
      {2, "trace identities on the same sample", criterion_traces, 0.0},
      {3, "reversible closed forms match the solver", criterion_reversible, 0.0},
      {4, "pointwise ground-state eigen residual", criterion_eigen_residual, 0.0},
      {5, "closed-form flow vs RK4 oracle and semigroup law", criterion_flow_oracle, 0.0},
      {6, "kernel reconstruction for the unit-frequency model", criterion_mehler, 0.0},
      {7, "survival rate: stationary exactness and relaxation", criterion_survival, 0.0},
      {8, "normalizer scalar: dual routes, envelope, limit", criterion_kt, 0.0},
      {9, "entropy / Fisher decay suite on reversible flows", criterion_entropy_suite, 0.0},
      {10, "fitted contraction rates between two flows", criterion_stability_rates, 0.0},
      {11, "interacting-jump ground-state estimation", criterion_dmc, 60.0},
      {12, "interacting diffusions track the conditioned moments", criterion_enkf, 0.0},
      {13, "backward sampler vs conditioning oracle", criterion_backward, 0.0},
      {14, "seeded runs are byte-identical", criterion_determinism, 0.0}};

  int failures = 0;
  const auto t_start = std::chrono::steady_clock::now();
  for (const auto& entry : entries) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entry.body(out);
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail << "exception: " << e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (entry.budget_seconds > 0.0 && seconds > entry.budget_seconds) {
      out.passed = false;
      out.detail << "; exceeded " << entry.budget_seconds << "s budget";
    }
    if (!out.passed) ++failures;
    std::printf("[%s] criterion %02d: %s (%.2fs)%s%s\n", out.passed ? "PASS" : "FAIL",
                entry.id, entry.name, seconds, out.detail.str().empty() ? "" : " -- ",
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::printf("%d/%zu criteria passed in %.1fs\n",
              static_cast<int>(entries.size()) - failures, entries.size(), total);
  return failures == 0 ? 0 : 1;
}
