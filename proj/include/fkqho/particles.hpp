#pragma once

#include "fkqho/flow.hpp"
#include "fkqho/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fkqho {

/// Per-step ensemble summary; positions of the final ensemble are kept so
/// terminal-law checks do not need a rerun.
struct Trajectory {
  std::vector<double> t;
  std::vector<VectorXd> mean;
  std::vector<MatrixXd> cov;               // 1/(N-1) rescaling
  std::vector<double> mean_potential;      // empirical measure applied to V
  std::vector<double> log_norm;            // accumulated -int_0^t V d(empirical)
  std::vector<double> lambda0_estimate;    // running average of V over [t/2, t]
  std::vector<std::int64_t> jump_count;    // cumulative; stays 0 for diffusions
  MatrixXd final_positions;                // N x r
  double lambda0_final = 0.0;
  int regularization_events = 0;           // variant-3 covariance jitters
};

/// Interacting-jump ensemble: free Euler-Maruyama moves, then each walker
/// jumps with probability 1 - exp(-V dt) onto a uniformly chosen walker
/// (self allowed). Walker explosion raises std::runtime_error.
Trajectory dmc_run(const ModelParams& params, const GaussianState& eta0, int N, double T,
                   double dt, std::uint64_t seed, int threads = 0);

/// The three interacting-diffusion dynamics sharing the conditioned Gaussian
/// law: (1) stochastic gain, (2) deterministic-mean, (3) noise-free transport
/// with optional skew freedom. Variant 3 requires N >= r + 2; a near-singular
/// sample covariance is jittered by 1e-8 I and counted in the trajectory.
Trajectory enkf_run(const ModelParams& params, int variant, const GaussianState& eta0,
                    int N, double T, double dt, std::uint64_t seed,
                    const std::optional<MatrixXd>& skew = std::nullopt, int threads = 0);

/// Gain field U_t(x) = -P_t S (x + xhat) / 2 of the feedback formulation.
VectorXd fpf_gain(const MatrixXd& P_t, const MatrixXd& S, const VectorXd& xhat,
                  const VectorXd& x);

enum class HprocScheme { ExactOu, EulerMaruyama };

/// Ensemble of the conjugated linear diffusion. The exact one-step Gaussian
/// transition is the preferred scheme; Euler is kept for refinement studies.
Trajectory hproc_run(const ModelParams& params, const GroundState& gs,
                     const GaussianState& eta0, int N, double T, double dt,
                     std::uint64_t seed, HprocScheme scheme = HprocScheme::ExactOu,
                     int threads = 0);

struct BackwardMoments {
  std::vector<double> s;  // descending from t to s_min
  std::vector<VectorXd> mean_h;
  std::vector<MatrixXd> cov_h;
  std::vector<VectorXd> mean_fwd;  // forward references along the same grid
  std::vector<MatrixXd> cov_fwd;
};

/// Integrates the terminal-conditioned moment equations backwards from
/// (mean, cov) of the forward law at time t. Requires the forward covariance
/// to stay invertible on [s_min, t].
BackwardMoments backward_moments(const RiccatiSolution& sol, const GaussianState& eta0,
                                 double t, double s_min, int steps);

struct BackwardSample {
  std::vector<double> snapshot_s;
  std::vector<MatrixXd> positions;  // one N x r block per snapshot
};

/// Draws terminal states from the forward law at t and integrates the
/// backward diffusion with Euler steps, recording the requested snapshots.
BackwardSample backward_sample(const RiccatiSolution& sol, const GaussianState& eta0,
                               double t, double s_min, const std::vector<double>& snapshots,
                               int n_paths, double dt, std::uint64_t seed);

/// Thread budget: explicit argument wins, otherwise the FKQHO_THREADS
/// environment variable caps hardware concurrency.
int resolve_threads(int requested);

}  // namespace fkqho
