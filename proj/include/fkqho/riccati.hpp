#pragma once

#include "fkqho/model.hpp"

#include <cstdint>

namespace fkqho {

/// Both algebraic fixed points of Ricc(P) = AP + PA' + R - PSP together with
/// everything the flows downstream need: the dual pair in Q, limiting
/// Gramians, the two stable drifts and the bottom eigenvalue.
struct RiccatiSolution {
  Eigen::Index r;
  MatrixXd A, R, S;

  MatrixXd P_inf;        // positive fixed point
  MatrixXd P_inf_minus;  // negative fixed point
  MatrixXd Q_inf;        // -(P_inf_minus)^{-1}, positive fixed point of the dual equation
  MatrixXd Q_inf_minus;  // -(P_inf)^{-1}

  MatrixXd Delta_inf;    // stationary Gramian of drift_filter weighted by S
  MatrixXd Delta_inf_h;  // stationary Gramian of drift_h weighted by R

  MatrixXd drift_filter;  // A - P_inf S, Hurwitz
  MatrixXd drift_h;       // A - R Q_inf, Hurwitz
  double lambda0;         // Tr(S P_inf) / 2
};

/// ||AP + PA' + R - PSP||_F
double care_residual(const MatrixXd& A, const MatrixXd& R, const MatrixXd& S,
                     const MatrixXd& P);

/// Solves the fixed point pair by ordered Schur on the 2r x 2r Hamiltonian
/// [[A', -S], [-R, -A]] followed by Newton refinement sweeps (at most 5,
/// stopping when the residual no longer improves).
RiccatiSolution solve_care(const ModelParams& params);

/// Closed-form fixed points for reversible models (R > 0, AR = RA'),
/// built from the right-half-plane square root of A^2 + RS.
RiccatiSolution reversible_fixed_points(const ModelParams& params);

/// Swaps the roles (A,R,S) -> (A',S,R); fixed points and Gramians permute.
RiccatiSolution dual(const RiccatiSolution& sol);

/// Delta_t = int_0^t e^{s drift_filter'} S e^{s drift_filter} ds, evaluated as
/// Delta_inf - e^{t drift'} Delta_inf e^{t drift}.
MatrixXd gramian_delta(const RiccatiSolution& sol, double t);

/// Delta_t^h = int_0^t e^{s drift_h} R e^{s drift_h'} ds.
MatrixXd gramian_delta_h(const RiccatiSolution& sol, double t);

/// F_t(P) = I + (P - P_inf) Delta_t
MatrixXd f_map(const RiccatiSolution& sol, const MatrixXd& P, double t);

/// Condition number of F_t(P); throws past 1e14 to match the inversion guard.
double f_map_condition(const RiccatiSolution& sol, const MatrixXd& P, double t);

/// E_t(P) = e^{t drift_filter} F_t(P)^{-1}
MatrixXd semigroup_E(const RiccatiSolution& sol, const MatrixXd& P, double t);

/// phi_t(P) = P_inf + E_t(P_inf) F_t(P)^{-1} (P - P_inf) E_t(P_inf)'
MatrixXd riccati_flow(const RiccatiSolution& sol, const MatrixXd& P, double t);

/// Delta_t(0) = int_0^t E_s(0)' S E_s(0) ds, via the dual Riccati flow from 0.
MatrixXd delta0(const RiccatiSolution& sol, double t);

struct DecayConstants {
  double delta;
  double alpha, beta;      // ||e^{t drift_filter}|| <= alpha e^{-beta t}
  double alpha_h, beta_h;  // same for drift_h
  double iota_h;           // int_0^inf ||e^{t drift_h}||^2 dt
  double chi_delta;        // [lmin(Delta_delta) lmin(-P_inf_minus)]^{-1}
  MatrixXd Pi_minus_delta;  // flow sandwich: Pi- <= phi_t(P) <= Pi+ for t >= delta
  MatrixXd Pi_plus_delta;
};

/// (alpha, beta) from Coppel's inequality with gamma = 1/2, or (1, -mu) when
/// the log norm is already negative. Pi bounds come from the monotone flow
/// envelope at time delta; they are sampled certificates, not proofs.
DecayConstants decay_constants(const RiccatiSolution& sol, double delta = 0.1);

/// delta v (1 / 2 beta) log(2 n alpha_delta): the horizon beyond which the
/// entropy contraction bound between flows with ||P - Q|| <= n applies.
double entropy_bound_horizon(const DecayConstants& dc, Eigen::Index r, double n);

struct LipschitzSample {
  double t;
  double lhs, rhs;  // flow Lipschitz bound at this sample
};

struct LipschitzReport {
  bool all_hold;
  double tightest_ratio;            // max over samples of lhs / rhs
  double mean_flow_tightest_ratio;  // same for the mean-flow bound
  double identity_residual;         // worst two-sided flow decomposition residual
  std::vector<LipschitzSample> samples;
};

/// Samples the flow and mean-flow contraction bounds on randomized pairs and
/// checks the exact two-sided flow difference factorization.
LipschitzReport lipschitz_certificate(const RiccatiSolution& sol, double delta,
                                      int n_samples = 20, std::uint64_t seed = 0);

}  // namespace fkqho
