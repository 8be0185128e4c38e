#include "fkqho/particles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace fkqho {

int resolve_threads(int requested) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int cap = hw;
  if (const char* env = std::getenv("FKQHO_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = std::min(cap, v);
  }
  const int n = requested > 0 ? std::min(requested, cap) : cap;
  return std::clamp(n, 1, 64);
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
  threads = std::min(threads, n);
  if (threads <= 1 || n < 256) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

// Columns are walkers; stream index is the walker, step 0 is the initial draw.
MatrixXd init_ensemble(const GaussianState& eta0, int N, std::uint64_t seed) {
  const Eigen::Index r = eta0.mean.size();
  const MatrixXd half = sqrt_psd(eta0.cov);
  MatrixXd pos(r, N);
  for (int i = 0; i < N; ++i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), 0);
    VectorXd z(r);
    for (Eigen::Index k = 0; k < r; ++k) z(k) = rng.normal();
    pos.col(i) = eta0.mean + half * z;
  }
  return pos;
}

struct Recorder {
  explicit Recorder(const ModelParams& p) : params(p) {}

  void record(Trajectory& traj, const MatrixXd& pos, double t, std::int64_t jumps) {
    const int N = static_cast<int>(pos.cols());
    const VectorXd m = pos.rowwise().sum() / double(N);
    const MatrixXd centered = pos.colwise() - m;
    const MatrixXd cov = centered * centered.transpose() / double(N - 1);
    double v = 0.0;
    for (int i = 0; i < N; ++i) v += 0.5 * pos.col(i).dot(params.S * pos.col(i));
    v /= N;

    traj.t.push_back(t);
    traj.mean.push_back(m);
    traj.cov.push_back(cov);
    traj.mean_potential.push_back(v);
    traj.jump_count.push_back(jumps);

    // Trapezoid accumulation of the normalizing-constant log estimate.
    const std::size_t k = traj.t.size() - 1;
    if (k == 0) {
      traj.log_norm.push_back(0.0);
    } else {
      const double dt = traj.t[k] - traj.t[k - 1];
      traj.log_norm.push_back(traj.log_norm.back() -
                              0.5 * dt * (traj.mean_potential[k - 1] + v));
    }

    // Running average of the potential over the trailing half window.
    const std::size_t lo = k / 2;
    double acc = 0.0;
    for (std::size_t j = lo; j <= k; ++j) acc += traj.mean_potential[j];
    traj.lambda0_estimate.push_back(acc / double(k - lo + 1));
  }

  const ModelParams& params;
};

void check_finite(const MatrixXd& pos, double t, const char* who) {
  if (!pos.allFinite())
    throw std::runtime_error(std::string(who) +
                             ": walker positions became nonfinite at t = " +
                             std::to_string(t));
}

int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("particle run: need T > 0 and dt > 0");
  return std::max(1, static_cast<int>(std::llround(T / dt)));
}

}  // namespace

Trajectory dmc_run(const ModelParams& params, const GaussianState& eta0, int N, double T,
                   double dt, std::uint64_t seed, int threads) {
  if (N < 2) throw std::invalid_argument("dmc_run: need at least two walkers");
  const int n_steps = step_count(T, dt);
  const int n_threads = resolve_threads(threads);
  const Eigen::Index r = params.r, r1 = params.r1;

  MatrixXd pos = init_ensemble(eta0, N, seed);
  const MatrixXd euler = MatrixXd::Identity(r, r) + dt * params.A;
  const double sqrt_dt = std::sqrt(dt);

  Trajectory traj;
  Recorder rec(params);
  rec.record(traj, pos, 0.0, 0);

  MatrixXd moved(r, N);
  std::vector<std::int32_t> target(N);
  std::int64_t jumps_total = 0;

  for (int k = 1; k <= n_steps; ++k) {
    std::atomic<long> jumps_step{0};
    parallel_for(N, n_threads, [&](int lo, int hi) {
      VectorXd z(r1);
      long local_jumps = 0;
      for (int i = lo; i < hi; ++i) {
        StreamRng rng(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        for (Eigen::Index c = 0; c < r1; ++c) z(c) = rng.normal();
        moved.col(i) = euler * pos.col(i) + sqrt_dt * (params.B * z);
        const double v = 0.5 * moved.col(i).dot(params.S * moved.col(i));
        const double p_jump = -std::expm1(-v * dt);
        if (rng.uniform() < p_jump) {
          target[i] = static_cast<std::int32_t>(rng.uniform_index(N));
          ++local_jumps;
        } else {
          target[i] = -1;
        }
      }
      jumps_step += local_jumps;
    });
    for (int i = 0; i < N; ++i)
      pos.col(i) = target[i] < 0 ? moved.col(i) : moved.col(target[i]);
    jumps_total += jumps_step.load();
    check_finite(pos, k * dt, "dmc_run");
    rec.record(traj, pos, k * dt, jumps_total);
  }

  traj.final_positions = pos.transpose();
  traj.lambda0_final = traj.lambda0_estimate.back();
  return traj;
}

Trajectory enkf_run(const ModelParams& params, int variant, const GaussianState& eta0,
                    int N, double T, double dt, std::uint64_t seed,
                    const std::optional<MatrixXd>& skew, int threads) {
  if (variant < 1 || variant > 3) throw std::invalid_argument("enkf_run: variant in {1,2,3}");
  const Eigen::Index r = params.r, r1 = params.r1;
  if (N < 2) throw std::invalid_argument("enkf_run: need at least two particles");
  if (variant == 3 && N < r + 2)
    throw std::invalid_argument("enkf_run: variant 3 needs N >= r + 2");
  MatrixXd skew_m = skew.value_or(MatrixXd::Zero(r, r));
  if ((skew_m + skew_m.transpose()).norm() > 1e-12 * std::max(1.0, skew_m.norm()))
    throw std::invalid_argument("enkf_run: skew matrix must be antisymmetric");

  const int n_steps = step_count(T, dt);
  const int n_threads = resolve_threads(threads);
  const MatrixXd s_half = sqrt_psd(params.S, 1e-8);
  const double sqrt_dt = std::sqrt(dt);

  MatrixXd pos = init_ensemble(eta0, N, seed);
  Trajectory traj;
  Recorder rec(params);
  rec.record(traj, pos, 0.0, 0);

  for (int k = 1; k <= n_steps; ++k) {
    const VectorXd m = pos.rowwise().sum() / double(N);
    const MatrixXd centered = pos.colwise() - m;
    MatrixXd cov = centered * centered.transpose() / double(N - 1);

    MatrixXd prop;       // one-step linear map
    VectorXd offset;     // affine part
    MatrixXd gain_noise; // variant 1 extra diffusion
    if (variant == 1) {
      prop = MatrixXd::Identity(r, r) + dt * (params.A - cov * params.S);
      offset = VectorXd::Zero(r);
      gain_noise = sqrt_dt * (cov * s_half);
    } else if (variant == 2) {
      prop = MatrixXd::Identity(r, r) + dt * (params.A - 0.5 * cov * params.S);
      offset = -0.5 * dt * (cov * (params.S * m));
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
      if (es.eigenvalues().minCoeff() < 1e-10) {
        cov += 1e-8 * MatrixXd::Identity(r, r);
        ++traj.regularization_events;
      }
      const MatrixXd gain = (0.5 * params.R + skew_m) * cov.inverse();
      prop = MatrixXd::Identity(r, r) + dt * (params.A - 0.5 * cov * params.S + gain);
      offset = -dt * ((0.5 * cov * params.S + gain) * m);
    }

    parallel_for(N, n_threads, [&](int lo, int hi) {
      VectorXd z1(r), z2(r1);
      for (int i = lo; i < hi; ++i) {
        StreamRng rng(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        VectorXd x = prop * pos.col(i) + offset;
        if (variant == 1) {
          for (Eigen::Index c = 0; c < r; ++c) z1(c) = rng.normal();
          x += gain_noise * z1;
        }
        if (variant != 3) {
          for (Eigen::Index c = 0; c < r1; ++c) z2(c) = rng.normal();
          x += sqrt_dt * (params.B * z2);
        }
        pos.col(i) = x;
      }
    });
    check_finite(pos, k * dt, "enkf_run");
    rec.record(traj, pos, k * dt, 0);
  }

  traj.final_positions = pos.transpose();
  traj.lambda0_final = traj.lambda0_estimate.back();
  return traj;
}

VectorXd fpf_gain(const MatrixXd& P_t, const MatrixXd& S, const VectorXd& xhat,
                  const VectorXd& x) {
  return -0.5 * P_t * S * (x + xhat);
}

Trajectory hproc_run(const ModelParams& params, const GroundState& gs,
                     const GaussianState& eta0, int N, double T, double dt,
                     std::uint64_t seed, HprocScheme scheme, int threads) {
  if (N < 2) throw std::invalid_argument("hproc_run: need at least two particles");
  const int n_steps = step_count(T, dt);
  const int n_threads = resolve_threads(threads);
  const Eigen::Index r = params.r, r1 = params.r1;

  MatrixXd pos = init_ensemble(eta0, N, seed);
  Trajectory traj;
  Recorder rec(params);
  rec.record(traj, pos, 0.0, 0);

  MatrixXd prop, noise_half;
  Eigen::Index z_dim;
  if (scheme == HprocScheme::ExactOu) {
    prop = expm(gs.sol.drift_h, dt);
    noise_half = sqrt_psd(
        sym(gs.P_h_inf - prop * gs.P_h_inf * prop.transpose()), 1e-8);
    z_dim = r;
  } else {
    prop = MatrixXd::Identity(r, r) + dt * gs.sol.drift_h;
    noise_half = std::sqrt(dt) * params.B;
    z_dim = r1;
  }

  for (int k = 1; k <= n_steps; ++k) {
    parallel_for(N, n_threads, [&](int lo, int hi) {
      VectorXd z(z_dim);
      for (int i = lo; i < hi; ++i) {
        StreamRng rng(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        for (Eigen::Index c = 0; c < z_dim; ++c) z(c) = rng.normal();
        pos.col(i) = prop * pos.col(i) + noise_half * z;
      }
    });
    check_finite(pos, k * dt, "hproc_run");
    rec.record(traj, pos, k * dt, 0);
  }

  traj.final_positions = pos.transpose();
  traj.lambda0_final = traj.lambda0_estimate.back();
  return traj;
}

namespace {

struct ForwardGrid {
  std::vector<VectorXd> xhat;
  std::vector<MatrixXd> p;
  std::vector<MatrixXd> p_inv;
};

ForwardGrid forward_references(const RiccatiSolution& sol, const GaussianState& eta0,
                               const std::vector<double>& ss) {
  ForwardGrid grid;
  for (double s_raw : ss) {
    const double s = std::max(s_raw, 0.0);  // grid accumulation can round below 0
    const GaussianState fwd = propagate_state(sol, eta0, s);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(fwd.cov);
    if (es.eigenvalues().minCoeff() < 1e-12)
      throw std::domain_error(
          "backward pass: forward covariance is numerically singular at s = " +
          std::to_string(s) + "; increase s_min");
    grid.xhat.push_back(fwd.mean);
    grid.p.push_back(fwd.cov);
    grid.p_inv.push_back(fwd.cov.partialPivLu().solve(
        MatrixXd::Identity(sol.r, sol.r)));
  }
  return grid;
}

}  // namespace

BackwardMoments backward_moments(const RiccatiSolution& sol, const GaussianState& eta0,
                                 double t, double s_min, int steps) {
  if (!(t > s_min) || s_min < 0.0)
    throw std::invalid_argument("backward_moments: need 0 <= s_min < t");
  if (steps < 1) throw std::invalid_argument("backward_moments: steps >= 1");
  const Eigen::Index r = sol.r;
  const double h = (t - s_min) / steps;

  auto forward_at = [&](double s) {
    return propagate_state(sol, eta0, std::max(s, 0.0));
  };
  auto deriv = [&](double s, const VectorXd& mean_h, const MatrixXd& cov_h,
                   VectorXd& dmean, MatrixXd& dcov) {
    const GaussianState fwd = forward_at(s);
    Eigen::PartialPivLU<MatrixXd> lu(fwd.cov);
    const MatrixXd rp = sol.R * lu.solve(MatrixXd::Identity(r, r));
    const MatrixXd m = sol.A + rp;
    dmean = sol.A * mean_h + rp * (mean_h - fwd.mean);
    dcov = m * cov_h + cov_h * m.transpose() - sol.R;
  };

  BackwardMoments out;
  GaussianState terminal = forward_at(t);
  VectorXd mean = terminal.mean;
  MatrixXd cov = terminal.cov;

  auto store = [&](double s) {
    const GaussianState fwd = forward_at(s);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(fwd.cov);
    if (es.eigenvalues().minCoeff() < 1e-12)
      throw std::domain_error(
          "backward_moments: forward covariance singular at s = " + std::to_string(s) +
          "; increase s_min");
    out.s.push_back(s);
    out.mean_h.push_back(mean);
    out.cov_h.push_back(sym(cov));
    out.mean_fwd.push_back(fwd.mean);
    out.cov_fwd.push_back(fwd.cov);
  };

  store(t);
  VectorXd k1m(r), k2m(r), k3m(r), k4m(r);
  MatrixXd k1c(r, r), k2c(r, r), k3c(r, r), k4c(r, r);
  for (int k = 0; k < steps; ++k) {
    const double s = t - k * h;  // integrate towards s - h
    deriv(s, mean, cov, k1m, k1c);
    deriv(s - 0.5 * h, mean - 0.5 * h * k1m, cov - 0.5 * h * k1c, k2m, k2c);
    deriv(s - 0.5 * h, mean - 0.5 * h * k2m, cov - 0.5 * h * k2c, k3m, k3c);
    deriv(s - h, mean - h * k3m, cov - h * k3c, k4m, k4c);
    mean -= (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    cov -= (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    store(s - h);
  }
  return out;
}

BackwardSample backward_sample(const RiccatiSolution& sol, const GaussianState& eta0,
                               double t, double s_min, const std::vector<double>& snapshots,
                               int n_paths, double dt, std::uint64_t seed) {
  if (!(t > s_min) || s_min < 0.0)
    throw std::invalid_argument("backward_sample: need 0 <= s_min < t");
  if (n_paths < 1) throw std::invalid_argument("backward_sample: n_paths >= 1");
  const Eigen::Index r = sol.r;
  const int n_steps = std::max(1, static_cast<int>(std::llround((t - s_min) / dt)));
  const double h = (t - s_min) / n_steps;

  std::vector<double> grid(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) grid[k] = t - k * h;
  const ForwardGrid fwd = forward_references(sol, eta0, grid);

  std::vector<int> snap_idx;
  for (double s : snapshots) {
    const int k = std::clamp(static_cast<int>(std::llround((t - s) / h)), 0, n_steps);
    snap_idx.push_back(k);
  }

  const GaussianState terminal = propagate_state(sol, eta0, t);
  const MatrixXd term_half = sqrt_psd(terminal.cov);
  const MatrixXd b_half = sqrt_psd(sol.R, 1e-8);  // noise in law only needs R^{1/2}
  const double sqrt_h = std::sqrt(h);

  BackwardSample out;
  out.snapshot_s.resize(snap_idx.size());
  out.positions.assign(snap_idx.size(), MatrixXd(n_paths, r));
  for (std::size_t j = 0; j < snap_idx.size(); ++j) out.snapshot_s[j] = grid[snap_idx[j]];

  const int n_threads = resolve_threads(0);
  parallel_for(n_paths, n_threads, [&](int lo, int hi) {
    VectorXd z(r), x(r);
    for (int p = lo; p < hi; ++p) {
      StreamRng init_rng(seed, static_cast<std::uint64_t>(p), 0);
      for (Eigen::Index c = 0; c < r; ++c) z(c) = init_rng.normal();
      x = terminal.mean + term_half * z;
      for (std::size_t j = 0; j < snap_idx.size(); ++j)
        if (snap_idx[j] == 0) out.positions[j].row(p) = x.transpose();
      for (int k = 1; k <= n_steps; ++k) {
        StreamRng rng(seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
        for (Eigen::Index c = 0; c < r; ++c) z(c) = rng.normal();
        const VectorXd drift =
            sol.A * x + sol.R * (fwd.p_inv[k - 1] * (x - fwd.xhat[k - 1]));
        x += -h * drift + sqrt_h * (b_half * z);
        for (std::size_t j = 0; j < snap_idx.size(); ++j)
          if (snap_idx[j] == k) out.positions[j].row(p) = x.transpose();
      }
    }
  });
  return out;
}

}  // namespace fkqho
